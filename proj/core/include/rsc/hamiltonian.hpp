#pragma once

// Effective two-photon generator acting on ground hyperfine sublevels times
// trap states, after adiabatic elimination of the excited manifold.
//
// Conventions. Beam 0 (depopulating) is referenced to F+, the control beams
// to F-; nu_j = (omega_j - omega_0) - kappa_j * Delta_hpf with kappa_0 = 0
// and kappa_j = 1 otherwise. An entry (target, source, amplitude, phase)
// contributes amplitude * exp(i * phase * t) to H(target, source), and
// i dc/dt = H(t) c. Two-photon terms whose phase would carry a multiple of
// Delta_hpf are discarded.

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rsc/angular_momentum.hpp"
#include "rsc/geometry.hpp"
#include "rsc/trap.hpp"

namespace rsc {

enum class Manifold { upper = 0, lower = 1 };  // F+ and F-

struct SpinLabel {
  Manifold manifold = Manifold::upper;
  HalfInt F;
  HalfInt M;

  std::string str() const;
  friend bool operator==(const SpinLabel&, const SpinLabel&) = default;
  friend auto operator<=>(const SpinLabel&, const SpinLabel&) = default;
};

/// Linear Zeeman energies slope * M on each manifold, units of gamma.
struct ZeemanSlopes {
  double upper = 0;
  double lower = 0;
};

struct LevelScheme {
  ReducedDipoleContext atom;
  HalfInt F_upper;
  HalfInt F_lower;
  std::vector<HalfInt> excited;  // F' of the excited fine-structure level
  std::vector<double> detuning;  // Delta_F of beam 0 from F+ to each F', units of gamma
  double hyperfine_splitting = 0;
  ZeemanSlopes zeeman;

  /// 85Rb D2 line with a common detuning plus optional per-F' offsets.
  static LevelScheme rb85_d2(double detuning, double hyperfine_splitting,
                             std::vector<double> excited_offsets = {});

  void validate() const;
  std::vector<SpinLabel> ground_states() const;  // F+ sublevels, then F-
  HalfInt F(Manifold m) const { return m == Manifold::upper ? F_upper : F_lower; }
  /// Lande factor of a ground manifold with electron g-factor 2.
  double g_factor(Manifold m) const;
  double zeeman_energy(const SpinLabel& s) const;
  /// Detuning seen by `beam` on the transition from ground manifold `from` to excited F'[i].
  double beam_detuning(int beam, std::size_t excited_index, Manifold from) const;
};

struct BasisState {
  SpinLabel spin;
  VibState vib;

  std::string str() const;
  friend bool operator==(const BasisState&, const BasisState&) = default;
  friend auto operator<=>(const BasisState&, const BasisState&) = default;
};

class Basis {
 public:
  Basis() = default;
  explicit Basis(std::vector<BasisState> states);

  std::size_t size() const { return states_.size(); }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  std::optional<std::size_t> find(const BasisState& s) const;
  std::size_t index_of(const BasisState& s) const;  // throws if absent
  int max_quanta() const;

 private:
  std::vector<BasisState> states_;
  std::map<BasisState, std::size_t> index_;
};

/// Every ground sublevel times every v with |v_mu - center_mu| <= radius and v_mu >= 0.
Basis make_box_basis(const LevelScheme& levels, const VibState& center, int radius,
                     std::size_t max_states = 4096);

/// States of the Raman transition diagram: F+ sublevels at v, F- sublevels
/// at v (leakage) and at each v - 1_mu with v_mu > 0 (destination).
Basis make_scheme_basis(const LevelScheme& levels, const VibState& v);

/// Every ground sublevel times 0 <= v_mu <= vmax.
Basis make_product_basis(const std::vector<SpinLabel>& spins, int vmax, std::size_t max_states = 4096);

/// F+ sublevels at v plus F- sublevels at each v - 1_mu with v_mu > 0.
Basis make_reduced_basis(const LevelScheme& levels, const VibState& v);

/// Fully specified excitation: levels (with Zeeman slopes), beams (with
/// polarizations, carriers and Rabi amplitudes) and the trap.
struct RamanScheme {
  LevelScheme levels;
  BeamSet beams;
  TrapParams trap;
  SpinLabel source;                 // |F+, 0>
  std::vector<SpinLabel> targets;   // |F-, 0>, |F-, 1>, |F-, 2>
  bool control_terms = false;       // two-photon terms built from two control beams
  double delta_b = 0;               // light shift of the source
  double delta_m = 0;               // mean light shift of the targets
  double zeeman_b = 0;
  double zeeman_m = 0;              // mean Zeeman energy of the targets

  /// Rotating-frame energy removed from each manifold.
  double frame_energy(Manifold m) const;
  /// nu_j, the carrier offset with the hyperfine part removed.
  double carrier_detuning(int beam) const;
};

struct SchemeOptions {
  bool zeeman_compensation = true;
  // Adds the control-control terms (their light shifts and Raman couplings)
  // to the tuning and to the full generator.
  bool control_terms = false;
};

RamanScheme prepare_scheme(const LevelScheme& levels, const TrapParams& trap,
                           const std::array<double, kBeams>& rabi, const SchemeOptions& opts = {});

/// Sum_q c_q <F' M'|d_q|F M> for beam j, units of <J||d||S>.
std::complex<double> beam_dipole(const BeamSet& beams, int beam, HalfInt Fp, HalfInt Mp,
                                 const SpinLabel& ground, const LevelScheme& levels);

/// Spin part of the (absorb k, emit j) two-photon element from `source` to
/// `target`, including Omega_j Omega_k / 4 and the detuning denominator.
std::complex<double> two_photon_spin(const SpinLabel& target, const SpinLabel& source, int j, int k,
                                     const BeamSet& beams, const LevelScheme& levels);

/// alpha_a = ((k_k - k_j) . e_a) eta_a per trap axis.
std::array<double, 3> recoil_arguments(const BeamSet& beams, const TrapParams& trap, int j, int k);

/// Full two-photon element <target| W^{jk} |source>, spin times vibration.
std::complex<double> two_photon_element(const BasisState& target, const BasisState& source, int j,
                                        int k, const BeamSet& beams, const LevelScheme& levels,
                                        const TrapParams& trap,
                                        DisplacementMode mode = DisplacementMode::linearized);

/// Sideband coupling from b (in F+) to the F- sublevel `m` with one quantum
/// removed along mu, driven by beam 0 and control beam j(mu). Zero when v_mu = 0.
std::complex<double> raman_coupling(const BasisState& b, const SpinLabel& m, Axis mu,
                                    const RamanScheme& scheme,
                                    DisplacementMode mode = DisplacementMode::linearized);

/// Beam-0 light shift of an F+ sublevel; with controls also their contributions.
double light_shift_upper(const SpinLabel& b, const BeamSet& beams, const LevelScheme& levels,
                         bool include_controls = false);
double light_shift_lower(const SpinLabel& m, const BeamSet& beams, const LevelScheme& levels,
                         bool include_controls = false);
double mean_light_shift_lower(const std::vector<SpinLabel>& targets, const BeamSet& beams,
                              const LevelScheme& levels, bool include_controls = false);

/// Least-squares linear field making the target sublevels degenerate.
ZeemanSlopes zeeman_compensation(const LevelScheme& levels, const BeamSet& beams,
                                 const std::vector<SpinLabel>& targets, bool include_controls = false);

/// (Omega2, Omega3) balancing the three sideband couplings for mean quanta vbar.
std::pair<double, double> balanced_rabi(const TrapParams& trap, const VibState& vbar, double omega1);

enum class Frame { lab, rotating };
enum class GeneratorKind { full, reduced };

struct GeneratorOptions {
  GeneratorKind kind = GeneratorKind::full;
  Frame frame = Frame::rotating;
  DisplacementMode displacement = DisplacementMode::linearized;
};

struct EffectiveCoupling {
  std::size_t target = 0;
  std::size_t source = 0;
  std::complex<double> amplitude;
  double rotating_phase = 0;
};

class Generator {
 public:
  Generator(Basis basis, std::vector<EffectiveCoupling> entries, Frame frame);

  const Basis& basis() const { return basis_; }
  const std::vector<EffectiveCoupling>& entries() const { return entries_; }
  Frame frame() const { return frame_; }
  std::size_t dimension() const { return basis_.size(); }

  Eigen::MatrixXcd matrix(double t) const;
  /// Time-independent diagonal part.
  Eigen::VectorXd static_diagonal() const;
  double hermiticity_defect(double t) const;
  /// Sub-generator on the listed states, in the listed order.
  Generator restricted(const std::vector<std::size_t>& keep) const;
  /// Same couplings with every diagonal entry shifted by `shift[i]`.
  Generator with_diagonal_shift(const Eigen::VectorXd& shift) const;

  nlohmann::json to_json() const;

 private:
  Basis basis_;
  std::vector<EffectiveCoupling> entries_;
  Frame frame_;
};

/// Assembles the generator on `basis`. Entries with equal (target, source,
/// phase) are merged and exact zeros are dropped.
Generator build_generator(const Basis& basis, const RamanScheme& scheme, const GeneratorOptions& opts);

}  // namespace rsc
