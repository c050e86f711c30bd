#include "rsc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Sparse>

#include "rsc/errors.hpp"

namespace rsc {

std::size_t SpinVibDensityMatrix::vib_count() const {
  const auto n = static_cast<std::size_t>(vmax + 1);
  return n * n * n;
}

std::size_t SpinVibDensityMatrix::index(std::size_t spin, const VibState& v) const {
  const auto n = static_cast<std::size_t>(vmax + 1);
  return spin * vib_count() + (static_cast<std::size_t>(v.vx) * n + static_cast<std::size_t>(v.vy)) * n +
         static_cast<std::size_t>(v.vz);
}

VibState SpinVibDensityMatrix::vib_at(std::size_t k) const {
  const auto n = static_cast<std::size_t>(vmax + 1);
  return {static_cast<int>(k / (n * n)), static_cast<int>((k / n) % n), static_cast<int>(k % n)};
}

Basis SpinVibDensityMatrix::basis() const { return make_product_basis(spins, vmax, rho.rows() + 1); }

double SpinVibDensityMatrix::trace() const { return rho.trace().real(); }

double SpinVibDensityMatrix::hermiticity_defect() const {
  return rho.size() ? (rho - rho.adjoint()).cwiseAbs().maxCoeff() : 0.0;
}

double SpinVibDensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SpinVibDensityMatrix::population(std::size_t spin, const VibState& v) const {
  const auto i = static_cast<Eigen::Index>(index(spin, v));
  return rho(i, i).real();
}

Eigen::MatrixXcd SpinVibDensityMatrix::vibrational() const {
  const auto nv = static_cast<Eigen::Index>(vib_count());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nv, nv);
  for (std::size_t s = 0; s < spins.size(); ++s) {
    const auto o = static_cast<Eigen::Index>(s) * nv;
    out += rho.block(o, o, nv, nv);
  }
  return out;
}

std::array<double, 3> SpinVibDensityMatrix::mean_quanta() const {
  const auto m = marginals();
  std::array<double, 3> q{};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t v = 0; v < m[a].size(); ++v) q[a] += static_cast<double>(v) * m[a][v];
  return q;
}

std::array<std::vector<double>, 3> SpinVibDensityMatrix::marginals() const {
  std::array<std::vector<double>, 3> m;
  for (auto& x : m) x.assign(static_cast<std::size_t>(vmax + 1), 0.0);
  const Eigen::MatrixXcd v = vibrational();
  for (std::size_t k = 0; k < vib_count(); ++k) {
    const double p = v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
    const VibState s = vib_at(k);
    for (Axis a : kAxes) m[static_cast<std::size_t>(rsc::index(a))][static_cast<std::size_t>(s[a])] += p;
  }
  return m;
}

double SpinVibDensityMatrix::max_vibrational_coherence() const {
  Eigen::MatrixXcd v = vibrational();
  v.diagonal().setZero();
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

std::vector<SpinLabel> ideal_spins(const LevelScheme& levels) {
  std::vector<SpinLabel> s{{Manifold::upper, levels.F_upper, HalfInt(0)}};
  for (int m = 0; m <= 2; ++m) s.push_back({Manifold::lower, levels.F_lower, HalfInt(m)});
  return s;
}

SpinVibDensityMatrix thermal_state(const TrapParams& trap, const ThermalSpec& thermal,
                                   const std::vector<SpinLabel>& spins, std::size_t source, int vmax,
                                   double max_tail) {
  thermal.validate();
  if (source >= spins.size()) throw std::out_of_range("source spin index out of range");
  if (vmax < 0) throw ConfigError("vmax must be >= 0");
  SpinVibDensityMatrix r;
  r.spins = spins;
  r.vmax = vmax;
  r.tail = truncation_tail(vmax, trap, thermal);
  if (r.tail > max_tail) {
    throw NumericalError("thermal weight " + std::to_string(r.tail) + " beyond vmax = " + std::to_string(vmax) +
                         " exceeds " + std::to_string(max_tail));
  }
  const auto n = static_cast<Eigen::Index>(spins.size() * r.vib_count());
  r.rho = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < r.vib_count(); ++k) {
    const auto i = static_cast<Eigen::Index>(r.index(source, r.vib_at(k)));
    r.rho(i, i) = boltzmann_weight(r.vib_at(k), trap, thermal);
  }
  return r;
}

CProfile uniform_profile() {
  return [](const VibState& v) {
    CoefficientSet c{};
    int active = 0;
    for (Axis a : kAxes) active += v[a] > 0;
    if (active == 0) return c;
    const double x = 1.0 / std::sqrt(static_cast<double>(active));
    for (Axis a : kAxes)
      if (v[a] > 0) c[static_cast<std::size_t>(rsc::index(a))] = x;
    return c;
  };
}

CProfile single_axis_profile(Axis mu) {
  return [mu](const VibState& v) {
    CoefficientSet c{};
    if (v[mu] > 0) c[static_cast<std::size_t>(rsc::index(mu))] = 1.0;
    return c;
  };
}

CProfile simulated_profile(const RamanScheme& scheme, int vmax,
                           const IntegratorOptions& opts) {
  auto table = std::make_shared<std::map<VibState, CoefficientSet>>();
  const auto uniform = uniform_profile();
  for (int x = 0; x <= vmax; ++x)
    for (int y = 0; y <= vmax; ++y)
      for (int z = 0; z <= vmax; ++z) {
        const VibState v{x, y, z};
        int active = (x > 0) + (y > 0) + (z > 0);
        if (active <= 1) {
          (*table)[v] = uniform(v);
          continue;
        }
        const PulseRun run = simulate_pulse(scheme, v, ScenarioOptions{}, opts);
        const double tau = optimal_tau(run.result, 1e-3);
        const AmplitudeVector amp = evolve(run.generator, basis_vector(run.generator.dimension(), run.base), 0.0, tau, opts);
        const TargetStates ts = target_states(run.generator.basis(), run.base, amp);
        CoefficientSet c{};
        double norm = 0;
        for (std::size_t a = 0; a < 3; ++a) norm += ts.weight[a] * ts.weight[a];
        norm = std::sqrt(norm);
        for (std::size_t a = 0; a < 3; ++a) c[a] = ts.weight[a] / norm;
        (*table)[v] = c;
      }
  return [table](const VibState& v) {
    auto it = table->find(v);
    if (it == table->end()) throw std::out_of_range("no simulated coefficients for " + v.str());
    return it->second;
  };
}

TargetSpins orthonormal_targets(std::size_t spin_count) {
  if (spin_count < 4) throw std::invalid_argument("need the source plus three target spins");
  TargetSpins t;
  for (std::size_t a = 0; a < 3; ++a) {
    t[a] = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spin_count));
    t[a](static_cast<Eigen::Index>(a + 1)) = 1.0;
  }
  return t;
}

namespace {

void require_source_support(const SpinVibDensityMatrix& r, std::size_t source) {
  const auto nv = static_cast<Eigen::Index>(r.vib_count());
  const auto o = static_cast<Eigen::Index>(source) * nv;
  const double total = r.rho.cwiseAbs().sum();
  const double inside = r.rho.block(o, o, nv, nv).cwiseAbs().sum();
  if (total - inside > 1e-12) {
    throw std::invalid_argument("Raman step expects the state to be supported on the source spin");
  }
}

Eigen::MatrixXcd source_block(const SpinVibDensityMatrix& r, std::size_t source) {
  const auto nv = static_cast<Eigen::Index>(r.vib_count());
  const auto o = static_cast<Eigen::Index>(source) * nv;
  return r.rho.block(o, o, nv, nv);
}

}  // namespace

SpinVibDensityMatrix raman_step_ideal(const SpinVibDensityMatrix& rho, const CProfile& profile,
                                      const TargetSpins& targets, std::size_t source) {
  require_source_support(rho, source);
  const std::size_t ns = rho.spins.size();
  for (const auto& t : targets) {
    if (t.size() != static_cast<Eigen::Index>(ns)) throw std::invalid_argument("target spin vector has the wrong size");
  }
  const auto nv = rho.vib_count();
  const auto n = static_cast<Eigen::Index>(ns * nv);
  std::vector<Eigen::Triplet<std::complex<double>>> entries;
  for (std::size_t c = 0; c < nv; ++c) {
    const VibState v = rho.vib_at(c);
    const auto col = static_cast<Eigen::Index>(c);
    CoefficientSet cs{};
    if (v.total() > 0) cs = profile(v);
    double norm2 = 0;
    for (Axis a : kAxes) {
      const auto ca = cs[static_cast<std::size_t>(rsc::index(a))];
      if (ca != 0.0 && v[a] == 0) {
        throw ConfigError("C profile addresses an empty mode at " + v.str());
      }
      norm2 += std::norm(ca);
    }
    if (norm2 == 0.0) {
      entries.emplace_back(static_cast<Eigen::Index>(rho.index(source, v)), col, 1.0);
      continue;
    }
    if (std::abs(norm2 - 1.0) > 1e-10) {
      throw ConfigError("C profile is not normalized at " + v.str());
    }
    for (Axis a : kAxes) {
      const auto ca = cs[static_cast<std::size_t>(rsc::index(a))];
      if (ca == 0.0) continue;
      const VibState lower = v.lowered(a);
      for (std::size_t s = 0; s < ns; ++s) {
        const auto t = targets[static_cast<std::size_t>(rsc::index(a))](static_cast<Eigen::Index>(s));
        if (t != 0.0) entries.emplace_back(static_cast<Eigen::Index>(rho.index(s, lower)), col, ca * t);
      }
    }
  }
  Eigen::SparseMatrix<std::complex<double>> k(n, static_cast<Eigen::Index>(nv));
  k.setFromTriplets(entries.begin(), entries.end());
  const Eigen::MatrixXcd half = k * source_block(rho, source);
  SpinVibDensityMatrix out = rho;
  out.rho = (k * half.adjoint()).adjoint();
  return out;
}

SpinVibDensityMatrix optical_pump(const SpinVibDensityMatrix& rho, PumpingMode mode, std::size_t source) {
  Eigen::MatrixXcd v = rho.vibrational();
  if (mode == PumpingMode::dephasing) v = Eigen::MatrixXcd(v.diagonal().asDiagonal());
  SpinVibDensityMatrix out = rho;
  out.rho.setZero();
  const auto nv = static_cast<Eigen::Index>(rho.vib_count());
  const auto o = static_cast<Eigen::Index>(source) * nv;
  out.rho.block(o, o, nv, nv) = v;
  return out;
}

SpinVibDensityMatrix raman_step_simulated(const SpinVibDensityMatrix& rho, const Generator& generator,
                                          double tau, std::size_t source, const IntegratorOptions& opts) {
  require_source_support(rho, source);
  const Basis basis = rho.basis();
  if (generator.basis().states() != basis.states()) {
    throw std::invalid_argument("generator basis does not match the density matrix");
  }
  if (tau < 0) throw ConfigError("pulse duration must be >= 0");
  const auto nv = rho.vib_count();
  const Eigen::MatrixXcd block = source_block(rho, source);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(nv));
  std::vector<Eigen::Index> used;
  for (std::size_t c = 0; c < nv; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (block.row(col).cwiseAbs().sum() == 0.0) continue;
    used.push_back(col);
    const auto start = rho.index(source, rho.vib_at(c));
    u.col(col) = evolve(generator, basis_vector(basis.size(), start), 0.0, tau, opts);
  }
  for (auto a : used)
    for (auto b : used) {
      const std::complex<double> g = u.col(a).dot(u.col(b));
      if (std::abs(g - (a == b ? 1.0 : 0.0)) > 1e-6) {
        throw NumericalError("pulse propagator is not unitary to 1e-6");
      }
    }
  SpinVibDensityMatrix out = rho;
  out.rho = u * block * u.adjoint();
  return out;
}

double ledger_check(const std::vector<double>& populations, int vmax, const CProfile& profile,
                    const TrapParams& trap, const ThermalSpec& thermal) {
  SpinVibDensityMatrix layout;
  layout.vmax = vmax;
  if (populations.size() != layout.vib_count()) throw std::invalid_argument("population vector has the wrong size");
  auto weight_of = [&](const VibState& v) {
    CoefficientSet c{};
    if (v.total() > 0) c = profile(v);
    return c;
  };
  double worst = 0;
  for (std::size_t k = 0; k < layout.vib_count(); ++k) {
    const VibState v = layout.vib_at(k);
    double expected = 0;
    const auto cv = weight_of(v);
    double stay = 0;
    for (const auto& c : cv) stay += std::norm(c);
    if (stay == 0.0) expected += boltzmann_weight(v, trap, thermal);
    for (Axis a : kAxes) {
      const VibState up = v.raised(a);
      if (up[a] > vmax) continue;
      expected += std::norm(weight_of(up)[static_cast<std::size_t>(rsc::index(a))]) * boltzmann_weight(up, trap, thermal);
    }
    worst = std::max(worst, std::abs(expected - populations[k]));
  }
  return worst;
}

double truncated_cutoff_weight(int n, int vmax, const TrapParams& trap, const ThermalSpec& thermal) {
  double s = 0;
  for (int x = 0; x <= vmax; ++x)
    for (int y = 0; y <= vmax; ++y)
      for (int z = 0; z <= vmax; ++z)
        if (x + y + z <= n) s += boltzmann_weight({x, y, z}, trap, thermal);
  return s;
}

void ProtocolConfig::validate() const {
  if (n_steps < 0) throw ConfigError("protocol steps must be >= 0");
  if (vmax < 0) throw ConfigError("vmax must be >= 0");
  if (pulse_duration && *pulse_duration < 0) throw ConfigError("pulse duration must be >= 0");
}

namespace {

VibState rounded_quanta(const std::array<double, 3>& q) {
  VibState v;
  for (Axis a : kAxes) v[a] = std::max(1, static_cast<int>(std::lround(q[static_cast<std::size_t>(rsc::index(a))])));
  return v;
}

double optimal_duration(const RamanScheme& scheme, const VibState& vbar, const IntegratorOptions& opts) {
  const PulseRun run = simulate_pulse(scheme, vbar, ScenarioOptions{}, opts);
  return optimal_tau(run.result, 1e-3);
}

}  // namespace

std::vector<StepReport> run_protocol(const ProtocolConfig& config, const ProtocolInputs& in) {
  config.validate();
  const bool simulated = config.raman == RamanMode::simulated;
  std::vector<SpinLabel> spins = simulated ? in.levels.ground_states() : ideal_spins(in.levels);
  const SpinLabel source_label{Manifold::upper, in.levels.F_upper, HalfInt(0)};
  const auto source = static_cast<std::size_t>(std::find(spins.begin(), spins.end(), source_label) - spins.begin());

  SpinVibDensityMatrix rho = thermal_state(in.trap, in.thermal, spins, source, config.vmax, config.max_tail);
  const double z = partition_function(in.trap, in.thermal);

  const CProfile profile = in.profile ? in.profile : uniform_profile();
  const TargetSpins targets = simulated ? TargetSpins{} : orthonormal_targets(spins.size());

  std::optional<Generator> generator;
  double tau = 0;
  VibState vbar = in.mean_quanta;
  auto prepare = [&](const VibState& v) {
    if (!in.scheme_for) throw ConfigError("simulated protocol needs a beam configuration");
    const RamanScheme scheme = in.scheme_for(v);
    GeneratorOptions g;
    generator = build_generator(rho.basis(), scheme, g);
    tau = config.pulse_duration ? *config.pulse_duration : optimal_duration(scheme, v, in.integrator);
  };
  if (simulated) prepare(vbar);

  std::vector<StepReport> reports;
  auto report = [&](int step) {
    StepReport r;
    r.step = step;
    r.dark_population = rho.population(source, VibState{});
    r.prediction = partition_cutoff(step, in.trap, in.thermal) / z;
    r.truncated_prediction = truncated_cutoff_weight(step, config.vmax, in.trap, in.thermal);
    r.mean_quanta = rho.mean_quanta();
    r.tail = rho.tail;
    r.trace = rho.trace();
    r.marginals = rho.marginals();
    r.pulse_duration = tau;
    reports.push_back(std::move(r));
  };
  report(0);
  for (int n = 1; n <= config.n_steps; ++n) {
    if (simulated) {
      if (config.reoptimize && n > 1) {
        const VibState next = rounded_quanta(rho.mean_quanta());
        if (next != vbar) {
          vbar = next;
          prepare(vbar);
        }
      }
      rho = raman_step_simulated(rho, *generator, tau, source, in.integrator);
    } else {
      rho = raman_step_ideal(rho, profile, targets, source);
    }
    rho = optical_pump(rho, config.pumping, source);
    report(n);
  }
  return reports;
}

nlohmann::json to_json(const StepReport& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["dark_population"] = r.dark_population;
  j["analytic_prediction"] = r.prediction;
  j["truncated_prediction"] = r.truncated_prediction;
  j["mean_quanta"] = r.mean_quanta;
  j["truncation_tail"] = r.tail;
  j["trace"] = r.trace;
  j["marginals"] = {{"x", r.marginals[0]}, {"y", r.marginals[1]}, {"z", r.marginals[2]}};
  if (r.pulse_duration > 0) j["pulse_duration"] = r.pulse_duration;
  return j;
}

}  // namespace rsc
