#pragma once

// Iterated cooling protocol on a spin x vibration density matrix: Raman
// step (ideal isometry or simulated propagator), optical pumping back to the
// source spin, dark-state bookkeeping against the partition-sum cutoffs.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rsc/dynamics.hpp"
#include "rsc/hamiltonian.hpp"
#include "rsc/trap.hpp"

namespace rsc {

/// Dense density matrix on spins x {0..vmax}^3, spin-major ordering (the
/// order of make_product_basis). `tail` is the Gibbs weight that never
/// entered the truncated space; trace + tail = 1.
struct SpinVibDensityMatrix {
  std::vector<SpinLabel> spins;
  int vmax = 0;
  Eigen::MatrixXcd rho;
  double tail = 0;

  std::size_t vib_count() const;
  std::size_t index(std::size_t spin, const VibState& v) const;
  VibState vib_at(std::size_t vib_index) const;
  Basis basis() const;

  double trace() const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  double population(std::size_t spin, const VibState& v) const;
  /// Tr_spin rho.
  Eigen::MatrixXcd vibrational() const;
  std::array<double, 3> mean_quanta() const;
  std::array<std::vector<double>, 3> marginals() const;
  /// Largest |rho| over vibrational off-diagonal elements of Tr_spin rho.
  double max_vibrational_coherence() const;
};

/// Source spin |F+,0> followed by the three ideal targets |F-,0..2>.
std::vector<SpinLabel> ideal_spins(const LevelScheme& levels);

/// Gibbs weights exp{beta[F - eps_v]} times |s><s|. Not renormalized; throws
/// NumericalError when the weight outside the box exceeds `max_tail`.
SpinVibDensityMatrix thermal_state(const TrapParams& trap, const ThermalSpec& thermal,
                                   const std::vector<SpinLabel>& spins, std::size_t source, int vmax,
                                   double max_tail = 1e-3);

using CoefficientSet = std::array<std::complex<double>, 3>;
/// C_mu for every occupied v (v != 0).
using CProfile = std::function<CoefficientSet(const VibState&)>;

/// C_mu = 1/sqrt(number of axes with v_mu > 0) on those axes.
CProfile uniform_profile();
/// C = 1 on one axis whenever v_mu > 0; states with v_mu = 0 stay put.
CProfile single_axis_profile(Axis mu);
/// |C_mu| extracted from simulated pulses at their optimal duration, renormalized.
CProfile simulated_profile(const RamanScheme& scheme, int vmax,
                           const IntegratorOptions& opts = {});

/// Spin vectors (over rho.spins) of the three targets.
using TargetSpins = std::array<Eigen::VectorXcd, 3>;
TargetSpins orthonormal_targets(std::size_t spin_count);

/// |s,v> -> sum_mu C_mu |t_mu, v-1_mu>; |s,000> and states with C = 0 are
/// left in place. Throws when the state has weight outside the source spin
/// or when the profile is not lossless.
SpinVibDensityMatrix raman_step_ideal(const SpinVibDensityMatrix& rho, const CProfile& profile,
                                      const TargetSpins& targets, std::size_t source = 0);

enum class PumpingMode { dephasing, coherent };

/// Tr_spin then re-tensor with |s><s|; dephasing also zeroes vibrational coherences.
SpinVibDensityMatrix optical_pump(const SpinVibDensityMatrix& rho, PumpingMode mode, std::size_t source = 0);

/// rho -> U rho U^dagger with U the pulse propagator from 0 to tau, built
/// column by column for the occupied source states. The generator basis
/// must equal rho.basis().
SpinVibDensityMatrix raman_step_simulated(const SpinVibDensityMatrix& rho, const Generator& generator,
                                          double tau, std::size_t source = 0,
                                          const IntegratorOptions& opts = {});

/// Post-step vibrational populations rebuilt from the closed form, compared
/// with `populations` (indexed like SpinVibDensityMatrix::vib_at). Returns
/// the largest absolute deviation.
double ledger_check(const std::vector<double>& populations, int vmax, const CProfile& profile,
                    const TrapParams& trap, const ThermalSpec& thermal);

enum class RamanMode { ideal, simulated };

struct ProtocolConfig {
  int n_steps = 10;
  int vmax = 5;
  RamanMode raman = RamanMode::ideal;
  PumpingMode pumping = PumpingMode::dephasing;
  double max_tail = 1e-3;
  std::optional<double> pulse_duration;  // simulated mode; optimal at the mean quanta otherwise
  bool reoptimize = false;
  void validate() const;
};

struct StepReport {
  int step = 0;
  double dark_population = 0;
  double prediction = 0;            // exp(beta F) Z^(n), untruncated
  double truncated_prediction = 0;  // the same cutoff sum restricted to the box
  std::array<double, 3> mean_quanta{};
  double tail = 0;
  double trace = 0;
  std::array<std::vector<double>, 3> marginals;
  double pulse_duration = 0;        // simulated mode
};

struct ProtocolInputs {
  TrapParams trap;
  ThermalSpec thermal;
  LevelScheme levels;
  /// Beams for given mean quanta; needed for simulated steps, simulated
  /// profiles and re-optimization.
  std::function<RamanScheme(const VibState&)> scheme_for;
  VibState mean_quanta{2, 2, 4};
  CProfile profile;            // ideal mode; uniform when empty
  IntegratorOptions integrator;
};

std::vector<StepReport> run_protocol(const ProtocolConfig& config, const ProtocolInputs& inputs);

/// Sum of exp{beta[F - eps_v]} over |v| <= n inside the box 0 <= v_mu <= vmax.
double truncated_cutoff_weight(int n, int vmax, const TrapParams& trap, const ThermalSpec& thermal);

nlohmann::json to_json(const StepReport& r);

}  // namespace rsc
