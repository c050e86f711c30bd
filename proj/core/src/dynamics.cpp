#include "rsc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <boost/numeric/odeint.hpp>

#include "rsc/errors.hpp"

namespace rsc {

namespace odeint = boost::numeric::odeint;

void PulseProfile::validate() const {
  if (!(duration > 0) || !std::isfinite(duration)) throw ConfigError("pulse duration must be positive");
}

namespace {

std::string drift_message(double drift, double t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "norm drift %.3e at t = %.6g", drift, t);
  return buf;
}

using State = std::vector<std::complex<double>>;
using Sparse = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

// H(t) = sum_g exp(i w_g t) H_g
class Rhs {
 public:
  explicit Rhs(const Generator& g) : n_(static_cast<Eigen::Index>(g.dimension())) {
    std::map<long long, std::size_t> slot;
    std::vector<std::vector<Eigen::Triplet<std::complex<double>>>> trips;
    for (const auto& e : g.entries()) {
      const long long key = std::llround(e.rotating_phase * 1e12);
      auto [it, inserted] = slot.try_emplace(key, freq_.size());
      if (inserted) {
        freq_.push_back(e.rotating_phase);
        trips.emplace_back();
      }
      trips[it->second].emplace_back(static_cast<int>(e.target), static_cast<int>(e.source), e.amplitude);
    }
    for (auto& t : trips) {
      Sparse m(n_, n_);
      m.setFromTriplets(t.begin(), t.end());
      mats_.push_back(std::move(m));
    }
  }

  void operator()(const State& x, State& dxdt, double t) const {
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), n_);
    Eigen::Map<Eigen::VectorXcd> dv(dxdt.data(), n_);
    dv.setZero();
    for (std::size_t g = 0; g < mats_.size(); ++g) {
      const std::complex<double> f = std::complex<double>(0, -1) * std::polar(1.0, freq_[g] * t);
      dv.noalias() += f * (mats_[g] * xv);
    }
  }

 private:
  Eigen::Index n_;
  std::vector<double> freq_;
  std::vector<Sparse> mats_;
};

double norm_sq(const State& x) {
  double s = 0;
  for (const auto& c : x) s += std::norm(c);
  return s;
}

void check_initial(const Generator& g, const AmplitudeVector& initial) {
  if (initial.size() != static_cast<Eigen::Index>(g.dimension())) {
    throw std::invalid_argument("initial state dimension does not match the generator");
  }
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-12) {
    throw std::invalid_argument("initial amplitudes must be normalized");
  }
}

template <class Observer>
void run(const Generator& g, State& x, const std::vector<double>& times, const IntegratorOptions& opts,
         Observer obs) {
  if (times.size() < 2) {
    obs(x, times.empty() ? 0.0 : times.front());
    return;
  }
  Rhs rhs(g);
  auto stepper = odeint::make_controlled(opts.atol, opts.rtol, odeint::runge_kutta_dopri5<State>());
  const double span = times.back() - times.front();
  const double dt = std::copysign(std::min(1.0, std::abs(span) / static_cast<double>(times.size())), span);
  try {
    odeint::integrate_times(stepper, std::ref(rhs), x, times.begin(), times.end(), dt, obs,
                            odeint::max_step_checker(1000000));
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string("integration failed: ") + e.what());
  }
}

}  // namespace

std::vector<Population> classify(const Basis& basis, std::size_t base) {
  const auto& b = basis[base];
  std::vector<Population> out(basis.size(), Population::other);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    if (i == base) {
      out[i] = Population::base;
    } else if (s.spin.manifold == b.spin.manifold) {
      if (s.vib == b.vib) out[i] = Population::imperfection;
    } else if (s.vib == b.vib) {
      out[i] = Population::leak;
    } else {
      for (Axis a : kAxes)
        if (b.vib[a] > 0 && s.vib == b.vib.lowered(a)) out[i] = Population::destination;
    }
  }
  return out;
}

AmplitudeVector basis_vector(std::size_t dimension, std::size_t i) {
  AmplitudeVector v = AmplitudeVector::Zero(static_cast<Eigen::Index>(dimension));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

SimulationResult integrate(const Generator& generator, const AmplitudeVector& initial,
                           const PulseProfile& pulse, std::size_t base, const IntegratorOptions& opts) {
  pulse.validate();
  check_initial(generator, initial);
  if (base >= generator.dimension()) throw std::out_of_range("base state index out of range");
  if (opts.grid_points < 2) throw ConfigError("grid needs at least two points");

  SimulationResult r;
  r.basis = generator.basis();
  r.base = base;
  const auto n = static_cast<std::size_t>(opts.grid_points);
  r.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.times[i] = pulse.duration * static_cast<double>(i) / static_cast<double>(n - 1);
  r.amplitudes.resize(static_cast<Eigen::Index>(generator.dimension()), static_cast<Eigen::Index>(n));

  const auto groups = classify(r.basis, base);
  for (auto* p : {&r.p_base, &r.p_dest, &r.p_imperfection, &r.p_leak, &r.p_other}) p->assign(n, 0.0);

  State x(initial.data(), initial.data() + initial.size());
  std::size_t k = 0;
  run(generator, x, r.times, opts, [&](const State& s, double t) {
    const double drift = std::abs(norm_sq(s) - 1.0);
    r.max_norm_drift = std::max(r.max_norm_drift, drift);
    if (drift > opts.norm_tolerance) {
      throw NumericalError(drift_message(drift, t));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      r.amplitudes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = s[i];
      const double p = std::norm(s[i]);
      switch (groups[i]) {
        case Population::base: r.p_base[k] += p; break;
        case Population::destination: r.p_dest[k] += p; break;
        case Population::imperfection: r.p_imperfection[k] += p; break;
        case Population::leak: r.p_leak[k] += p; break;
        case Population::other: r.p_other[k] += p; break;
      }
    }
    ++k;
  });
  return r;
}

AmplitudeVector evolve(const Generator& generator, const AmplitudeVector& initial, double t0, double t1,
                       const IntegratorOptions& opts) {
  check_initial(generator, initial);
  State x(initial.data(), initial.data() + initial.size());
  if (t0 == t1) return initial;
  run(generator, x, {t0, t1}, opts, [&](const State& s, double t) {
    const double drift = std::abs(norm_sq(s) - 1.0);
    if (drift > opts.norm_tolerance) {
      throw NumericalError(drift_message(drift, t));
    }
  });
  return Eigen::Map<const AmplitudeVector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double pi_pulse_duration(double omega_eff) {
  if (!(omega_eff > 0)) throw std::invalid_argument("effective Rabi frequency must be positive");
  return M_PI / omega_eff;
}

double optimal_tau(const SimulationResult& result, double tie_tolerance) {
  const auto& p = result.p_base;
  const std::size_t n = p.size();
  if (n < 3) throw NumericalError("too few samples to locate a minimum");
  const double pmin = *std::min_element(p.begin(), p.end());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (p[i] > pmin + tie_tolerance) continue;
    if (p[i] > p[i - 1] || p[i] > p[i + 1]) continue;
    const double denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
    double shift = denom > 0 ? 0.5 * (p[i - 1] - p[i + 1]) / denom : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    const double dt = result.times[i + 1] - result.times[i];
    return result.times[i] + shift * dt;
  }
  throw NumericalError("base population has no interior minimum in the simulated window");
}

double TargetStates::overlap(Axis a, Axis b) const {
  const auto ia = static_cast<std::size_t>(index(a));
  const auto ib = static_cast<std::size_t>(index(b));
  if (!addressed[ia] || !addressed[ib]) {
    throw std::logic_error("overlap requested for an axis that was not addressed");
  }
  return std::abs(gram(index(a), index(b)));
}

namespace {

Eigen::MatrixXcd addressed_gram(const TargetStates& t) {
  std::vector<int> idx;
  for (int i = 0; i < 3; ++i)
    if (t.addressed[static_cast<std::size_t>(i)]) idx.push_back(i);
  Eigen::MatrixXcd g(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = t.gram(idx[a], idx[b]);
  return g;
}

}  // namespace

double TargetStates::gram_min_eigenvalue() const {
  const Eigen::MatrixXcd g = addressed_gram(*this);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  return es.eigenvalues().minCoeff();
}

double TargetStates::gram_determinant() const { return addressed_gram(*this).determinant().real(); }

TargetStates target_states(const Basis& basis, std::size_t base, const AmplitudeVector& amplitudes) {
  const auto& b = basis[base];
  TargetStates out;
  std::vector<SpinLabel> lower;
  for (const auto& s : basis.states()) {
    if (s.spin.manifold != b.spin.manifold &&
        std::find(lower.begin(), lower.end(), s.spin) == lower.end()) {
      lower.push_back(s.spin);
    }
  }
  std::sort(lower.begin(), lower.end());
  out.sublevels = lower;
  const auto m = static_cast<Eigen::Index>(lower.size());

  double total = 0;
  for (Axis a : kAxes) {
    const auto ia = static_cast<std::size_t>(index(a));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m);
    if (b.vib[a] > 0) {
      for (Eigen::Index k = 0; k < m; ++k) {
        if (auto i = basis.find({lower[static_cast<std::size_t>(k)], b.vib.lowered(a)})) {
          v(k) = amplitudes(static_cast<Eigen::Index>(*i));
        }
      }
    }
    const double c = v.norm();
    out.weight[ia] = c;
    total += c * c;
    out.addressed[ia] = c > 1e-12;
    out.spin[ia] = out.addressed[ia] ? Eigen::VectorXcd(v / c) : v;
  }
  if (!out.addressed[0] && !out.addressed[1] && !out.addressed[2]) {
    throw NumericalError("no destination amplitude: every target group has zero norm");
  }
  out.residual = 1.0 - total;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (out.addressed[static_cast<std::size_t>(i)] && out.addressed[static_cast<std::size_t>(j)]) {
        out.gram(i, j) = out.spin[static_cast<std::size_t>(i)].dot(out.spin[static_cast<std::size_t>(j)]);
      } else {
        out.gram(i, j) = i == j ? 1.0 : 0.0;
      }
    }
  return out;
}

TargetStates target_states(const SimulationResult& result, double at) {
  if (result.times.empty()) throw std::invalid_argument("empty simulation result");
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.times.size(); ++i) {
    if (std::abs(result.times[i] - at) < std::abs(result.times[best] - at)) best = i;
  }
  return target_states(result.basis, result.base, result.at(best));
}

LeakageEstimate leakage_estimate(const RamanScheme& scheme, Frame frame, const SimulationResult& result,
                                 DisplacementMode mode) {
  const auto& b = result.basis[result.base];
  std::vector<SpinLabel> lower;
  for (const auto& s : scheme.levels.ground_states())
    if (s.manifold == Manifold::lower) lower.push_back(s);
  const std::size_t nt = result.times.size();
  const auto cb = result.amplitudes.row(static_cast<Eigen::Index>(result.base));

  LeakageEstimate est;
  est.times = result.times;
  est.population.assign(nt, 0.0);

  // Running integrals I_j(M, t) of exp(i D t) W exp(i phi t) c_b(t).
  const std::size_t nm = lower.size();
  std::vector<std::complex<double>> integral(3 * nm, 0.0);
  std::vector<double> diag(nm);
  std::vector<std::complex<double>> w(3 * nm);
  std::array<double, 3> phi{};
  for (std::size_t k = 0; k < nm; ++k) {
    double d = light_shift_lower(lower[k], scheme.beams, scheme.levels, scheme.control_terms) +
               scheme.levels.zeeman_energy(lower[k]);
    if (frame == Frame::rotating) d -= scheme.frame_energy(Manifold::lower);
    diag[k] = d;
  }
  for (int j = 1; j < kBeams; ++j) {
    double p = scheme.carrier_detuning(j);
    if (frame == Frame::rotating) p += scheme.frame_energy(Manifold::lower) - scheme.frame_energy(Manifold::upper);
    phi[static_cast<std::size_t>(j - 1)] = p;
    for (std::size_t k = 0; k < nm; ++k) {
      w[static_cast<std::size_t>(j - 1) * nm + k] =
          two_photon_element({lower[k], b.vib}, b, j, 0, scheme.beams, scheme.levels, scheme.trap, mode);
    }
  }

  auto integrand = [&](std::size_t jj, std::size_t k, std::size_t ti) {
    const double t = result.times[ti];
    return std::polar(1.0, (diag[k] + phi[jj]) * t) * w[jj * nm + k] * cb(static_cast<Eigen::Index>(ti));
  };
  for (std::size_t ti = 0; ti < nt; ++ti) {
    if (ti > 0) {
      const double h = result.times[ti] - result.times[ti - 1];
      for (std::size_t jj = 0; jj < 3; ++jj)
        for (std::size_t k = 0; k < nm; ++k) {
          integral[jj * nm + k] += 0.5 * h * (integrand(jj, k, ti - 1) + integrand(jj, k, ti));
        }
    }
    double pop = 0;
    for (std::size_t k = 0; k < nm; ++k) {
      std::complex<double> s = 0;
      for (std::size_t jj = 0; jj < 3; ++jj) s += integral[jj * nm + k];
      pop += std::norm(s);
    }
    est.population[ti] = pop;
    est.peak = std::max(est.peak, pop);
  }
  const double tf = nt ? result.times.back() : 0.0;
  for (std::size_t jj = 0; jj < 3; ++jj) {
    est.amplitudes[jj] = Eigen::VectorXcd(static_cast<Eigen::Index>(nm));
    for (std::size_t k = 0; k < nm; ++k) {
      est.amplitudes[jj](static_cast<Eigen::Index>(k)) =
          std::complex<double>(0, -1) * std::polar(1.0, -diag[k] * tf) * integral[jj * nm + k];
    }
  }
  return est;
}

int SchmidtDecomposition::rank(double threshold) const {
  int r = 0;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    if (coefficients(i) > threshold) ++r;
  return r;
}

SchmidtDecomposition schmidt_decompose(const Eigen::MatrixXcd& block) {
  SchmidtDecomposition s;
  s.norm = block.norm();
  if (s.norm == 0.0) throw std::invalid_argument("empty destination block");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block / s.norm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  s.coefficients = svd.singularValues();
  s.spin = svd.matrixU();
  s.vib = svd.matrixV().conjugate();
  return s;
}

SchmidtDecomposition schmidt_decompose(const Basis& basis, std::size_t base, const AmplitudeVector& amplitudes) {
  const auto& b = basis[base];
  std::vector<SpinLabel> lower;
  for (const auto& s : basis.states())
    if (s.spin.manifold != b.spin.manifold && std::find(lower.begin(), lower.end(), s.spin) == lower.end())
      lower.push_back(s.spin);
  std::sort(lower.begin(), lower.end());
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(lower.size()), 3);
  for (Axis a : kAxes) {
    if (b.vib[a] == 0) continue;
    for (std::size_t k = 0; k < lower.size(); ++k)
      if (auto i = basis.find({lower[k], b.vib.lowered(a)}))
        block(static_cast<Eigen::Index>(k), index(a)) = amplitudes(static_cast<Eigen::Index>(*i));
  }
  return schmidt_decompose(block);
}

double effective_rabi(const RamanScheme& scheme, const VibState& v, DisplacementMode mode) {
  double sum = 0;
  const BasisState b{scheme.source, v};
  for (Axis a : kAxes) {
    for (const auto& s : scheme.levels.ground_states()) {
      if (s.manifold == Manifold::lower) sum += std::norm(raman_coupling(b, s, a, scheme, mode));
    }
  }
  return 2.0 * std::sqrt(sum);
}

TwoLevelReduction two_level_restriction(const Generator& generator, std::size_t base) {
  const auto n = static_cast<Eigen::Index>(generator.dimension());
  const auto bi = static_cast<Eigen::Index>(base);
  Eigen::VectorXcd col = Eigen::VectorXcd::Zero(n);
  for (const auto& e : generator.entries()) {
    if (e.source != base || e.target == base) continue;
    if (std::abs(e.rotating_phase) > 1e-12) {
      throw std::invalid_argument("two-level restriction needs static couplings out of the base state");
    }
    col(static_cast<Eigen::Index>(e.target)) += e.amplitude;
  }
  const double w = col.norm();
  if (w == 0.0) throw NumericalError("base state is not coupled to anything");
  const Eigen::VectorXcd d = col / w;
  const Eigen::MatrixXcd h = generator.matrix(0.0);
  const double hbb = h(bi, bi).real();
  const double hdd = d.dot(h * d).real();

  // Label the destination with its largest component.
  Eigen::Index lead = 0;
  d.cwiseAbs().maxCoeff(&lead);
  Basis basis({generator.basis()[base], generator.basis()[static_cast<std::size_t>(lead)]});
  std::vector<EffectiveCoupling> entries{{0, 0, hbb, 0.0}, {1, 1, hbb, 0.0}, {1, 0, w, 0.0}, {0, 1, w, 0.0}};
  TwoLevelReduction r{Generator(std::move(basis), std::move(entries), generator.frame()), 2.0 * w, hdd - hbb};
  return r;
}

PulseRun simulate_pulse(const RamanScheme& scheme, const VibState& v, const ScenarioOptions& scenario,
                        const IntegratorOptions& opts) {
  Basis basis;
  GeneratorOptions gopts = scenario.generator;
  switch (scenario.basis) {
    case BasisKind::scheme: basis = make_scheme_basis(scheme.levels, v); break;
    case BasisKind::reduced:
      basis = make_reduced_basis(scheme.levels, v);
      gopts.kind = GeneratorKind::reduced;
      break;
    case BasisKind::box: basis = make_box_basis(scheme.levels, v, scenario.box_radius); break;
  }
  const std::size_t base = basis.index_of({scheme.source, v});
  double duration = 0;
  if (scenario.duration) {
    duration = *scenario.duration;
  } else {
    const double w = effective_rabi(scheme, v, gopts.displacement);
    if (!(w > 0)) throw NumericalError("quanta " + v.str() + " are not coupled to any destination");
    duration = scenario.window_factor * pi_pulse_duration(w);
  }
  Generator g = build_generator(basis, scheme, gopts);
  auto result = integrate(g, basis_vector(g.dimension(), base), PulseProfile{duration}, base, opts);
  return PulseRun{std::move(g), base, std::move(result)};
}

void write_csv(std::ostream& os, const SimulationResult& r) {
  os << "t,P_base,P_dest,P_imperfection,P_leak\n";
  char buf[160];
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", r.times[i], r.p_base[i], r.p_dest[i],
                  r.p_imperfection[i], r.p_leak[i]);
    os << buf;
  }
}

}  // namespace rsc
