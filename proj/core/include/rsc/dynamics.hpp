#pragma once

// Pulse dynamics: integration of i dc/dt = H(t) c, population bookkeeping
// and the post-processing used to characterize a Raman pulse.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rsc/hamiltonian.hpp"

namespace rsc {

using AmplitudeVector = Eigen::VectorXcd;

/// Rectangular pulse: the generator is on for 0 < t < duration.
struct PulseProfile {
  double duration = 0;  // 1/gamma
  void validate() const;
};

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double norm_tolerance = 1e-8;
  int grid_points = 2000;
};

enum class Population { base, destination, imperfection, leak, other };

/// Group of every basis state relative to the base state.
std::vector<Population> classify(const Basis& basis, std::size_t base);

struct SimulationResult {
  Basis basis;
  std::size_t base = 0;
  std::vector<double> times;
  Eigen::MatrixXcd amplitudes;  // state x time
  std::vector<double> p_base, p_dest, p_imperfection, p_leak, p_other;
  double max_norm_drift = 0;

  AmplitudeVector at(std::size_t time_index) const { return amplitudes.col(static_cast<Eigen::Index>(time_index)); }
};

/// Unit vector on basis state `i`.
AmplitudeVector basis_vector(std::size_t dimension, std::size_t i);

/// Integrates from 0 to pulse.duration on a uniform grid. Populations are
/// grouped relative to `base`. Throws NumericalError on norm drift or
/// step-size failure.
SimulationResult integrate(const Generator& generator, const AmplitudeVector& initial,
                           const PulseProfile& pulse, std::size_t base,
                           const IntegratorOptions& opts = {});

/// State at t1 starting from `initial` at t0; t1 < t0 integrates backwards.
AmplitudeVector evolve(const Generator& generator, const AmplitudeVector& initial, double t0,
                       double t1, const IntegratorOptions& opts = {});

double pi_pulse_duration(double omega_eff);

/// Earliest local minimum of P_base within `tie_tolerance` of the global
/// minimum, refined by a parabola through the neighbouring samples.
double optimal_tau(const SimulationResult& result, double tie_tolerance = 1e-6);

struct TargetStates {
  std::vector<SpinLabel> sublevels;     // F- sublevels, M ascending
  std::array<bool, 3> addressed{};
  std::array<double, 3> weight{};       // |C_mu|
  std::array<Eigen::VectorXcd, 3> spin; // normalized |t_mu>
  double residual = 0;                  // 1 - sum |C_mu|^2
  Eigen::Matrix3cd gram = Eigen::Matrix3cd::Identity();

  /// |<t_a|t_b>|; throws when either axis was not addressed.
  double overlap(Axis a, Axis b) const;
  /// Smallest eigenvalue of the Gram matrix of the addressed vectors.
  double gram_min_eigenvalue() const;
  double gram_determinant() const;
};

TargetStates target_states(const Basis& basis, std::size_t base, const AmplitudeVector& amplitudes);
/// Uses the grid point nearest to `at`.
TargetStates target_states(const SimulationResult& result, double at);

struct LeakageEstimate {
  std::array<Eigen::VectorXcd, 3> amplitudes;  // per control axis, over F- sublevels, at the last time
  std::vector<double> times;
  std::vector<double> population;              // total first-order leak population
  double peak = 0;
};

/// First-order amplitudes of the sublevels that keep the base state's
/// vibrational numbers, driven by the simulated c_b(t).
LeakageEstimate leakage_estimate(const RamanScheme& scheme, Frame frame, const SimulationResult& result,
                                 DisplacementMode mode = DisplacementMode::linearized);

struct SchmidtDecomposition {
  Eigen::VectorXd coefficients;  // descending, sum of squares 1
  Eigen::MatrixXcd spin;         // columns: spin vectors
  Eigen::MatrixXcd vib;          // columns: vibrational vectors
  double norm = 0;               // weight of the block before normalization
  int rank(double threshold = 1e-8) const;
};

/// SVD of a spin x vibration coefficient block.
SchmidtDecomposition schmidt_decompose(const Eigen::MatrixXcd& block);
/// Destination block: rows F- sublevels, columns the lowered axis.
SchmidtDecomposition schmidt_decompose(const Basis& basis, std::size_t base, const AmplitudeVector& amplitudes);

/// 2 * sqrt(sum over axes and F- sublevels of |raman_coupling|^2): the Rabi
/// frequency of the base-destination swap at quanta v.
double effective_rabi(const RamanScheme& scheme, const VibState& v,
                      DisplacementMode mode = DisplacementMode::linearized);

/// Two-state generator {b, d} with d the normalized image of b under the
/// off-diagonal couplings. The diagonal is re-tuned to resonance, so
/// P_d(t) = sin^2(omega_eff t / 2). Needs a rotating-frame generator whose
/// couplings out of b are static.
struct TwoLevelReduction {
  Generator generator;
  double omega_eff = 0;
  double detuning_removed = 0;  // H_dd - H_bb before re-tuning
};
TwoLevelReduction two_level_restriction(const Generator& generator, std::size_t base);

enum class BasisKind { scheme, reduced, box };

struct ScenarioOptions {
  BasisKind basis = BasisKind::scheme;
  GeneratorOptions generator;
  int box_radius = 1;
  double window_factor = 2.5;      // window = factor * pi / effective_rabi
  std::optional<double> duration;  // overrides the window
};

struct PulseRun {
  Generator generator;
  std::size_t base = 0;
  SimulationResult result;
};

/// Builds the basis and generator around |F+,0; v> and integrates one window.
PulseRun simulate_pulse(const RamanScheme& scheme, const VibState& v, const ScenarioOptions& scenario,
                        const IntegratorOptions& opts = {});

/// CSV header `t,P_base,P_dest,P_imperfection,P_leak`, 12 significant digits.
void write_csv(std::ostream& os, const SimulationResult& result);

}  // namespace rsc
