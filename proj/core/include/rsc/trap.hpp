#pragma once

// Harmonic trap: vibrational energies, Gibbs statistics, Lamb-Dicke factors
// and matrix elements of the recoil displacement operator.
//
// Natural units: hbar = 1, frequencies in units of the decay rate gamma,
// energies in hbar*gamma, beta in 1/(hbar*gamma). TrapParams also holds the SI
// mass and wavenumber.

#include <array>
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace rsc {

namespace si {
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J / K
inline constexpr double amu = 1.66053906660e-27;    // kg
inline constexpr double two_pi = 6.283185307179586;
}  // namespace si

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

constexpr int index(Axis a) { return static_cast<int>(a); }
std::string axis_name(Axis a);

struct TrapParams {
  double omega_perp = 0;  // radial frequency, units of gamma
  double omega_par = 0;   // axial frequency, units of gamma
  double mass = 0;        // kg
  double k0 = 0;          // 1/m, wavenumber of the depopulating beam
  double gamma = 0;       // rad/s, the frequency unit

  double omega(Axis a) const { return a == Axis::z ? omega_par : omega_perp; }
  void validate() const;

  /// Build from laboratory quantities (trap frequencies in Hz, gamma/2pi in Hz).
  static TrapParams from_si(double omega_perp_hz, double omega_par_hz, double mass_kg,
                            double wavelength_m, double gamma_hz);
};

struct VibState {
  int vx = 0;
  int vy = 0;
  int vz = 0;

  int operator[](Axis a) const { return a == Axis::x ? vx : (a == Axis::y ? vy : vz); }
  int& operator[](Axis a) { return a == Axis::x ? vx : (a == Axis::y ? vy : vz); }
  int total() const { return vx + vy + vz; }
  bool valid(int vmax) const;
  VibState lowered(Axis a) const;
  VibState raised(Axis a) const;
  std::string str() const;

  friend bool operator==(const VibState&, const VibState&) = default;
  friend auto operator<=>(const VibState&, const VibState&) = default;
};

struct ThermalSpec {
  double beta = 0;  // 1/(hbar gamma)

  void validate() const;
  static ThermalSpec from_temperature_uK(double temperature_uK, const TrapParams& trap);
};

/// Excitation energy hbar*Omega_par*(vz+1/2) + hbar*Omega_perp*(vx+vy+1).
double energy(const VibState& v, const TrapParams& trap);

/// k0 * sqrt(hbar / 2 m Omega_axis).
double lamb_dicke(const TrapParams& trap, Axis axis);

/// Emits a warning when either Lamb-Dicke factor is >= 1. Returns true in regime.
bool check_lamb_dicke_regime(const TrapParams& trap);

/// Bose-Einstein mean 1/(exp(beta Omega) - 1).
double mean_occupation(const TrapParams& trap, const ThermalSpec& thermal, Axis axis);

/// Standard deviation of the single-axis thermal distribution, sqrt(n(n+1)).
double occupation_sigma(const TrapParams& trap, const ThermalSpec& thermal, Axis axis);

/// Closed-form partition function Z = exp(-beta F) of the untruncated oscillator.
double partition_function(const TrapParams& trap, const ThermalSpec& thermal);

/// Free energy F(beta) = -ln(Z)/beta.
double free_energy(const TrapParams& trap, const ThermalSpec& thermal);

/// exp{beta[F - eps_v]}.
double boltzmann_weight(const VibState& v, const TrapParams& trap, const ThermalSpec& thermal);

/// Sum of exp(-beta eps_v) over vx+vy+vz <= n.
double partition_cutoff(int n, const TrapParams& trap, const ThermalSpec& thermal);

/// Gibbs weight outside the box 0 <= v_mu <= vmax. Warns above 1e-3.
double truncation_tail(int vmax, const TrapParams& trap, const ThermalSpec& thermal,
                       bool emit_warning = true);

/// sqrt(hbar Omega_axis / 2m), m/s.
double velocity_spread(const TrapParams& trap, Axis axis);

enum class DisplacementMode { exact, linearized };

/// <v_to| exp(i alpha (a + a^dagger)) |v_from>.
///
/// exact: matrix exponential on a basis padded by `kDisplacementPadding`
/// levels. linearized: first-order expansion, 1 on the diagonal,
/// i*alpha*sqrt(max(v_from, v_to)) for |v_to - v_from| = 1 and zero otherwise.
std::complex<double> displacement_element(int v_from, int v_to, double alpha,
                                          DisplacementMode mode = DisplacementMode::exact);

inline constexpr int kDisplacementPadding = 20;

/// Precomputed exp(i alpha (a + a^dagger)) for all 0 <= v, v' <= vmax.
class DisplacementTable {
 public:
  DisplacementTable(double alpha, int vmax, DisplacementMode mode);

  std::complex<double> operator()(int v_to, int v_from) const;
  double alpha() const { return alpha_; }
  int vmax() const { return vmax_; }
  const Eigen::MatrixXcd& matrix() const { return m_; }

 private:
  double alpha_;
  int vmax_;
  DisplacementMode mode_;
  Eigen::MatrixXcd m_;
};

}  // namespace rsc
