#include "rsc/hamiltonian.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "rsc/errors.hpp"

namespace rsc {

std::string SpinLabel::str() const {
  std::ostringstream os;
  os << (manifold == Manifold::upper ? "F+" : "F-") << '(' << F.str() << ',' << M.str() << ')';
  return os.str();
}

std::string BasisState::str() const { return spin.str() + vib.str(); }

LevelScheme LevelScheme::rb85_d2(double detuning, double hyperfine_splitting,
                                 std::vector<double> excited_offsets) {
  LevelScheme s;
  s.atom = ReducedDipoleContext{half(3), half(1), half(5), 1.0};
  s.F_upper = HalfInt(3);
  s.F_lower = HalfInt(2);
  s.excited = {HalfInt(1), HalfInt(2), HalfInt(3), HalfInt(4)};
  if (excited_offsets.empty()) excited_offsets.assign(s.excited.size(), 0.0);
  if (excited_offsets.size() != s.excited.size()) {
    throw ConfigError("expected one excited-level offset per F' = 1..4");
  }
  for (double off : excited_offsets) s.detuning.push_back(detuning + off);
  s.hyperfine_splitting = hyperfine_splitting;
  s.validate();
  return s;
}

void LevelScheme::validate() const {
  atom.validate();
  if (F_upper != atom.I + half(1) || F_lower != atom.I - half(1)) {
    throw ConfigError("ground manifolds must be F = I +- 1/2");
  }
  if (excited.empty() || detuning.size() != excited.size()) {
    throw ConfigError("excited manifold needs one detuning per F'");
  }
  for (double d : detuning) {
    if (d == 0.0 || !std::isfinite(d)) throw ConfigError("detunings must be finite and nonzero");
  }
  if (!(hyperfine_splitting > 0)) throw ConfigError("hyperfine splitting must be positive");
}

std::vector<SpinLabel> LevelScheme::ground_states() const {
  std::vector<SpinLabel> out;
  for (Manifold man : {Manifold::upper, Manifold::lower}) {
    const HalfInt f = F(man);
    for (int tm = -f.twice(); tm <= f.twice(); tm += 2) out.push_back({man, f, half(tm)});
  }
  return out;
}

double LevelScheme::g_factor(Manifold m) const {
  const double f = F(m).value();
  const double j = atom.S.value();
  const double i = atom.I.value();
  return 2.0 * (f * (f + 1) + j * (j + 1) - i * (i + 1)) / (2.0 * f * (f + 1));
}

double LevelScheme::zeeman_energy(const SpinLabel& s) const {
  return (s.manifold == Manifold::upper ? zeeman.upper : zeeman.lower) * s.M.value();
}

double LevelScheme::beam_detuning(int beam, std::size_t i, Manifold from) const {
  const double d = detuning.at(i);
  if (beam == 0) return from == Manifold::upper ? d : d - hyperfine_splitting;
  return from == Manifold::lower ? d : d + hyperfine_splitting;
}

Basis::Basis(std::vector<BasisState> states) : states_(std::move(states)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i], i).second) {
      throw std::invalid_argument("duplicate basis state " + states_[i].str());
    }
  }
}

std::optional<std::size_t> Basis::find(const BasisState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Basis::index_of(const BasisState& s) const {
  auto i = find(s);
  if (!i) throw std::out_of_range("state " + s.str() + " is not in the basis");
  return *i;
}

int Basis::max_quanta() const {
  int m = 0;
  for (const auto& s : states_) m = std::max({m, s.vib.vx, s.vib.vy, s.vib.vz});
  return m;
}

namespace {

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw NumericalError("basis of " + std::to_string(n) + " states exceeds the cap of " +
                         std::to_string(cap));
  }
}

}  // namespace

Basis make_box_basis(const LevelScheme& levels, const VibState& center, int radius,
                     std::size_t max_states) {
  if (radius < 0) throw std::invalid_argument("box radius must be >= 0");
  std::vector<VibState> vibs;
  for (int x = center.vx - radius; x <= center.vx + radius; ++x)
    for (int y = center.vy - radius; y <= center.vy + radius; ++y)
      for (int z = center.vz - radius; z <= center.vz + radius; ++z)
        if (x >= 0 && y >= 0 && z >= 0) vibs.push_back({x, y, z});
  const auto spins = levels.ground_states();
  check_cap(spins.size() * vibs.size(), max_states);
  std::vector<BasisState> states;
  for (const auto& s : spins)
    for (const auto& v : vibs) states.push_back({s, v});
  return Basis(std::move(states));
}

Basis make_product_basis(const std::vector<SpinLabel>& spins, int vmax, std::size_t max_states) {
  if (vmax < 0) throw std::invalid_argument("vmax must be >= 0");
  const std::size_t nv = static_cast<std::size_t>(vmax + 1);
  check_cap(spins.size() * nv * nv * nv, max_states);
  std::vector<BasisState> states;
  for (const auto& s : spins)
    for (int x = 0; x <= vmax; ++x)
      for (int y = 0; y <= vmax; ++y)
        for (int z = 0; z <= vmax; ++z) states.push_back({s, {x, y, z}});
  return Basis(std::move(states));
}

Basis make_scheme_basis(const LevelScheme& levels, const VibState& v) {
  std::vector<BasisState> states;
  for (const auto& s : levels.ground_states()) states.push_back({s, v});
  for (Axis a : kAxes) {
    if (v[a] == 0) continue;
    for (const auto& s : levels.ground_states())
      if (s.manifold == Manifold::lower) states.push_back({s, v.lowered(a)});
  }
  return Basis(std::move(states));
}

Basis make_reduced_basis(const LevelScheme& levels, const VibState& v) {
  std::vector<BasisState> states;
  for (const auto& s : levels.ground_states())
    if (s.manifold == Manifold::upper) states.push_back({s, v});
  for (Axis a : kAxes) {
    if (v[a] == 0) continue;
    for (const auto& s : levels.ground_states())
      if (s.manifold == Manifold::lower) states.push_back({s, v.lowered(a)});
  }
  return Basis(std::move(states));
}

double RamanScheme::frame_energy(Manifold m) const {
  return m == Manifold::upper ? delta_b + zeeman_b : delta_m + zeeman_m;
}

double RamanScheme::carrier_detuning(int beam) const {
  const double w = beams.carrier_offsets.at(static_cast<std::size_t>(beam));
  return beam == 0 ? w : w - levels.hyperfine_splitting;
}

std::complex<double> beam_dipole(const BeamSet& beams, int beam, HalfInt Fp, HalfInt Mp,
                                 const SpinLabel& ground, const LevelScheme& levels) {
  const auto& e = beams.polarizations.at(static_cast<std::size_t>(beam));
  const Spherical c = spherical_components(e, beams.directions[0]);
  std::complex<double> sum = 0.0;
  for (int q = -1; q <= 1; ++q) {
    const auto cq = c[static_cast<std::size_t>(q + 1)];
    if (cq == 0.0) continue;
    const double d = dipole_element(Fp, Mp, q, ground.F, ground.M, levels.atom);
    if (d != 0.0) sum += cq * d;
  }
  return sum;
}

std::complex<double> two_photon_spin(const SpinLabel& target, const SpinLabel& source, int j, int k,
                                     const BeamSet& beams, const LevelScheme& levels) {
  const double oj = beams.reduced_rabi.at(static_cast<std::size_t>(j));
  const double ok = beams.reduced_rabi.at(static_cast<std::size_t>(k));
  if (oj == 0.0 || ok == 0.0) return 0.0;
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < levels.excited.size(); ++i) {
    const HalfInt Fp = levels.excited[i];
    const double denom = 0.5 * (1.0 / levels.beam_detuning(k, i, source.manifold) +
                                1.0 / levels.beam_detuning(j, i, target.manifold));
    for (int tm = -Fp.twice(); tm <= Fp.twice(); tm += 2) {
      const HalfInt Mp = half(tm);
      const auto dk = beam_dipole(beams, k, Fp, Mp, source, levels);
      if (dk == 0.0) continue;
      const auto dj = beam_dipole(beams, j, Fp, Mp, target, levels);
      if (dj == 0.0) continue;
      sum += std::conj(dj) * dk * denom;
    }
  }
  return 0.25 * oj * ok * sum;
}

std::array<double, 3> recoil_arguments(const BeamSet& beams, const TrapParams& trap, int j, int k) {
  const Vec3 dk = beams.directions.at(static_cast<std::size_t>(k)) -
                  beams.directions.at(static_cast<std::size_t>(j));
  std::array<double, 3> a{};
  for (Axis ax : kAxes) a[static_cast<std::size_t>(index(ax))] = dk(index(ax)) * lamb_dicke(trap, ax);
  return a;
}

std::complex<double> two_photon_element(const BasisState& target, const BasisState& source, int j,
                                        int k, const BeamSet& beams, const LevelScheme& levels,
                                        const TrapParams& trap, DisplacementMode mode) {
  std::complex<double> amp = two_photon_spin(target.spin, source.spin, j, k, beams, levels);
  if (amp == 0.0) return amp;
  const auto alpha = recoil_arguments(beams, trap, j, k);
  for (Axis a : kAxes) {
    amp *= displacement_element(source.vib[a], target.vib[a], alpha[static_cast<std::size_t>(index(a))], mode);
  }
  return amp;
}

std::complex<double> raman_coupling(const BasisState& b, const SpinLabel& m, Axis mu,
                                    const RamanScheme& scheme, DisplacementMode mode) {
  if (b.spin.manifold != Manifold::upper || m.manifold != Manifold::lower) {
    throw std::invalid_argument("raman_coupling runs from F+ to F-");
  }
  if (b.vib[mu] == 0) return 0.0;
  const BasisState target{m, b.vib.lowered(mu)};
  return two_photon_element(target, b, beam_of_axis(mu), 0, scheme.beams, scheme.levels,
                            scheme.trap, mode);
}

namespace {

double self_shift(const SpinLabel& s, const BeamSet& beams, const LevelScheme& levels,
                  bool include_controls) {
  double sum = two_photon_spin(s, s, 0, 0, beams, levels).real();
  if (include_controls) {
    for (int j = 1; j < kBeams; ++j) sum += two_photon_spin(s, s, j, j, beams, levels).real();
  }
  return sum;
}

}  // namespace

double light_shift_upper(const SpinLabel& b, const BeamSet& beams, const LevelScheme& levels,
                         bool include_controls) {
  if (b.manifold != Manifold::upper) throw std::invalid_argument("expected an F+ sublevel");
  return self_shift(b, beams, levels, include_controls);
}

double light_shift_lower(const SpinLabel& m, const BeamSet& beams, const LevelScheme& levels,
                         bool include_controls) {
  if (m.manifold != Manifold::lower) throw std::invalid_argument("expected an F- sublevel");
  return self_shift(m, beams, levels, include_controls);
}

double mean_light_shift_lower(const std::vector<SpinLabel>& targets, const BeamSet& beams,
                              const LevelScheme& levels, bool include_controls) {
  if (targets.empty()) throw std::invalid_argument("no target sublevels");
  double s = 0;
  for (const auto& t : targets) s += light_shift_lower(t, beams, levels, include_controls);
  return s / static_cast<double>(targets.size());
}

ZeemanSlopes zeeman_compensation(const LevelScheme& levels, const BeamSet& beams,
                                 const std::vector<SpinLabel>& targets, bool include_controls) {
  if (targets.size() < 2) return {};
  const double n = static_cast<double>(targets.size());
  double sm = 0, ss = 0, smm = 0, sms = 0;
  for (const auto& t : targets) {
    const double m = t.M.value();
    const double s = light_shift_lower(t, beams, levels, include_controls);
    sm += m;
    ss += s;
    smm += m * m;
    sms += m * s;
  }
  const double var = smm - sm * sm / n;
  if (var == 0.0) return {};
  const double slope = (sms - sm * ss / n) / var;
  ZeemanSlopes z;
  z.lower = -slope;
  z.upper = z.lower * levels.g_factor(Manifold::upper) / levels.g_factor(Manifold::lower);
  return z;
}

std::pair<double, double> balanced_rabi(const TrapParams& trap, const VibState& vbar, double omega1) {
  if (vbar.vx <= 0 || vbar.vy <= 0 || vbar.vz <= 0) {
    throw ConfigError("balanced Rabi condition needs every mean quantum number > 0");
  }
  const double eta_perp = lamb_dicke(trap, Axis::x);
  const double eta_par = lamb_dicke(trap, Axis::z);
  const double o2 = omega1 * std::sqrt(static_cast<double>(vbar.vx) / vbar.vy);
  const double o3 = omega1 * (eta_perp / eta_par) * std::sqrt(static_cast<double>(vbar.vx) / vbar.vz);
  return {o2, o3};
}

RamanScheme prepare_scheme(const LevelScheme& levels, const TrapParams& trap,
                           const std::array<double, kBeams>& rabi, const SchemeOptions& opts) {
  levels.validate();
  trap.validate();
  RamanScheme s;
  s.trap = trap;
  s.levels = levels;
  s.control_terms = opts.control_terms;
  s.beams = canonical_beams();
  s.beams.polarizations[0] = sigma_plus(s.beams.directions[0]);
  const auto pol = control_polarizations(s.beams);
  for (int j = 1; j < kBeams; ++j) {
    s.beams.polarizations[static_cast<std::size_t>(j)] = pol[static_cast<std::size_t>(j - 1)].cast<std::complex<double>>();
  }
  s.beams.reduced_rabi = rabi;
  s.beams.validate();
  for (int j = 1; j < kBeams; ++j) {
    if (rabi[static_cast<std::size_t>(j)] > 0.2 * rabi[0]) {
      warn("control Rabi frequency " + std::to_string(rabi[static_cast<std::size_t>(j)]) +
           " is not small compared with the depopulating beam");
    }
  }

  s.source = {Manifold::upper, levels.F_upper, HalfInt(0)};
  for (int m = 0; m <= 2; ++m) s.targets.push_back({Manifold::lower, levels.F_lower, HalfInt(m)});

  if (opts.zeeman_compensation) {
    s.levels.zeeman = zeeman_compensation(s.levels, s.beams, s.targets, opts.control_terms);
  }
  s.delta_b = light_shift_upper(s.source, s.beams, s.levels, opts.control_terms);
  s.delta_m = mean_light_shift_lower(s.targets, s.beams, s.levels, opts.control_terms);
  s.zeeman_b = s.levels.zeeman_energy(s.source);
  s.zeeman_m = 0;
  for (const auto& t : s.targets) s.zeeman_m += s.levels.zeeman_energy(t);
  s.zeeman_m /= static_cast<double>(s.targets.size());

  ResonanceTargets r;
  r.hyperfine_splitting = s.levels.hyperfine_splitting;
  r.delta_b = s.delta_b;
  r.delta_m = s.delta_m;
  r.zeeman_b = s.zeeman_b;
  r.zeeman_m = s.zeeman_m;
  r.omega_perp = trap.omega_perp;
  r.omega_par = trap.omega_par;
  s.beams.carrier_offsets = carrier_frequencies(r);
  return s;
}

Generator::Generator(Basis basis, std::vector<EffectiveCoupling> entries, Frame frame)
    : basis_(std::move(basis)), entries_(std::move(entries)), frame_(frame) {
  for (const auto& e : entries_) {
    if (e.target >= basis_.size() || e.source >= basis_.size()) {
      throw std::out_of_range("generator entry refers to a state outside the basis");
    }
  }
}

Eigen::MatrixXcd Generator::matrix(double t) const {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& e : entries_) {
    h(static_cast<Eigen::Index>(e.target), static_cast<Eigen::Index>(e.source)) +=
        e.amplitude * std::polar(1.0, e.rotating_phase * t);
  }
  return h;
}

Eigen::VectorXd Generator::static_diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
  for (const auto& e : entries_) {
    if (e.target == e.source && e.rotating_phase == 0.0) d(static_cast<Eigen::Index>(e.target)) += e.amplitude.real();
  }
  return d;
}

double Generator::hermiticity_defect(double t) const {
  const Eigen::MatrixXcd h = matrix(t);
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

Generator Generator::restricted(const std::vector<std::size_t>& keep) const {
  std::vector<BasisState> states;
  std::map<std::size_t, std::size_t> remap;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    states.push_back(basis_[keep[i]]);
    remap[keep[i]] = i;
  }
  std::vector<EffectiveCoupling> out;
  for (const auto& e : entries_) {
    auto t = remap.find(e.target);
    auto s = remap.find(e.source);
    if (t == remap.end() || s == remap.end()) continue;
    out.push_back({t->second, s->second, e.amplitude, e.rotating_phase});
  }
  return Generator(Basis(std::move(states)), std::move(out), frame_);
}

Generator Generator::with_diagonal_shift(const Eigen::VectorXd& shift) const {
  if (shift.size() != static_cast<Eigen::Index>(basis_.size())) {
    throw std::invalid_argument("diagonal shift has the wrong dimension");
  }
  auto out = entries_;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (shift(static_cast<Eigen::Index>(i)) != 0.0) out.push_back({i, i, shift(static_cast<Eigen::Index>(i)), 0.0});
  }
  return Generator(basis_, std::move(out), frame_);
}

nlohmann::json Generator::to_json() const {
  nlohmann::json j;
  j["dimension"] = basis_.size();
  j["frame"] = frame_ == Frame::lab ? "lab" : "rotating";
  auto& labels = j["basis"] = nlohmann::json::array();
  for (const auto& s : basis_.states()) labels.push_back(s.str());
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"target", e.target},
                       {"source", e.source},
                       {"re", e.amplitude.real()},
                       {"im", e.amplitude.imag()},
                       {"phase", e.rotating_phase}});
  }
  return j;
}

namespace {

int hyperfine_index(Manifold m) { return m == Manifold::upper ? 0 : -1; }
int carrier_index(int beam) { return beam == 0 ? 0 : 1; }

}  // namespace

Generator build_generator(const Basis& basis, const RamanScheme& scheme, const GeneratorOptions& opts) {
  const auto& levels = scheme.levels;
  const auto& beams = scheme.beams;
  const auto spins = levels.ground_states();
  const std::size_t ns = spins.size();
  std::map<SpinLabel, std::size_t> spin_index;
  for (std::size_t i = 0; i < ns; ++i) spin_index[spins[i]] = i;

  // Spin amplitudes for every (target spin, source spin, j, k).
  std::vector<std::complex<double>> spin_amp(ns * ns * kBeams * kBeams);
  auto spin_at = [&](std::size_t t, std::size_t s, int j, int k) -> std::complex<double>& {
    return spin_amp[((t * ns + s) * kBeams + static_cast<std::size_t>(j)) * kBeams + static_cast<std::size_t>(k)];
  };
  for (std::size_t t = 0; t < ns; ++t)
    for (std::size_t s = 0; s < ns; ++s)
      for (int j = 0; j < kBeams; ++j)
        for (int k = 0; k < kBeams; ++k) {
          const int rule = hyperfine_index(spins[t].manifold) - hyperfine_index(spins[s].manifold) +
                           carrier_index(j) - carrier_index(k);
          if (rule != 0) continue;
          spin_at(t, s, j, k) = two_photon_spin(spins[t], spins[s], j, k, beams, levels);
        }

  const int vmax = basis.max_quanta();
  std::vector<std::array<DisplacementTable, 3>> tables;
  tables.reserve(kBeams * kBeams);
  for (int j = 0; j < kBeams; ++j)
    for (int k = 0; k < kBeams; ++k) {
      const auto a = recoil_arguments(beams, scheme.trap, j, k);
      tables.push_back({DisplacementTable(a[0], vmax, opts.displacement),
                        DisplacementTable(a[1], vmax, opts.displacement),
                        DisplacementTable(a[2], vmax, opts.displacement)});
    }

  std::array<double, kBeams> nu{};
  for (int j = 0; j < kBeams; ++j) nu[static_cast<std::size_t>(j)] = scheme.carrier_detuning(j);

  auto keep_pair = [&](int j, int k, const BasisState& target, const BasisState& source) {
    if (j != 0 && k != 0) return opts.kind == GeneratorKind::full && scheme.control_terms;
    if (opts.kind == GeneratorKind::full || j == k) return true;
    // Cross terms only between F+ at the reference quanta and F- with one quantum removed.
    return target.spin.manifold != source.spin.manifold;
  };

  using Key = std::tuple<std::size_t, std::size_t, long long>;
  std::map<Key, EffectiveCoupling> merged;
  auto add = [&](std::size_t t, std::size_t s, std::complex<double> amp, double phase) {
    if (amp == 0.0) return;
    const Key key{t, s, std::llround(phase * 1e12)};
    auto [it, inserted] = merged.try_emplace(key, EffectiveCoupling{t, s, amp, phase});
    if (!inserted) it->second.amplitude += amp;
  };

  const auto& trap = scheme.trap;
  for (std::size_t t = 0; t < basis.size(); ++t) {
    const auto& bt = basis[t];
    const std::size_t st = spin_index.at(bt.spin);
    for (std::size_t s = 0; s < basis.size(); ++s) {
      const auto& bs = basis[s];
      const std::size_t ss = spin_index.at(bs.spin);
      const double vib_phase = energy(bt.vib, trap) - energy(bs.vib, trap);
      for (int j = 0; j < kBeams; ++j)
        for (int k = 0; k < kBeams; ++k) {
          const auto spin = spin_at(st, ss, j, k);
          if (spin == 0.0) continue;
          if (!keep_pair(j, k, bt, bs)) continue;
          const auto& tab = tables[static_cast<std::size_t>(j * kBeams + k)];
          std::complex<double> amp = spin;
          for (Axis a : kAxes) {
            amp *= tab[static_cast<std::size_t>(index(a))](bt.vib[a], bs.vib[a]);
            if (amp == 0.0) break;
          }
          double phase = nu[static_cast<std::size_t>(j)] - nu[static_cast<std::size_t>(k)] + vib_phase;
          if (opts.frame == Frame::rotating) {
            phase += scheme.frame_energy(bt.spin.manifold) - scheme.frame_energy(bs.spin.manifold);
          }
          if (t == s && j == k) phase = 0.0;
          add(t, s, amp, phase);
        }
    }
    double diag = levels.zeeman_energy(bt.spin);
    if (opts.frame == Frame::rotating) diag -= scheme.frame_energy(bt.spin.manifold);
    add(t, t, diag, 0.0);
  }

  std::vector<EffectiveCoupling> entries;
  entries.reserve(merged.size());
  for (auto& [key, e] : merged) {
    if (e.amplitude != 0.0) entries.push_back(e);
  }
  return Generator(basis, std::move(entries), opts.frame);
}

}  // namespace rsc
