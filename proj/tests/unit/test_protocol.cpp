#include <cmath>

#include <gtest/gtest.h>

#include "rsc/errors.hpp"
#include "rsc/protocol.hpp"

using namespace rsc;

namespace {

constexpr double kGammaHz = 6.0666e6;
const double kHpf = 3035.732439e6 / kGammaHz;

TrapParams rb85_trap() { return TrapParams::from_si(200e3, 100e3, 84.911789738 * si::amu, 780.241e-9, kGammaHz); }
LevelScheme levels() { return LevelScheme::rb85_d2(-1000, kHpf); }

RamanScheme scheme_for(const VibState& v) {
  const TrapParams trap = rb85_trap();
  const auto [o2, o3] = balanced_rabi(trap, v, 1.0);
  return prepare_scheme(levels(), trap, {20, 1, o2, o3});
}

// exp(-beta eps_v) summed over every v with vx+vy+vz <= n, by enumeration.
double brute_cutoff(int n, const TrapParams& trap, const ThermalSpec& th, int box = 1000) {
  double s = 0;
  for (int x = 0; x <= std::min(n, box); ++x)
    for (int y = 0; y <= std::min(n - x, box); ++y)
      for (int z = 0; z <= std::min(n - x - y, box); ++z) s += std::exp(-th.beta * energy({x, y, z}, trap));
  return s;
}

double brute_z(const TrapParams& trap, const ThermalSpec& th) {
  double s = 0;
  for (int x = 0; x < 400; ++x)
    for (int y = 0; y < 400; ++y) {
      const double exy = std::exp(-th.beta * energy({x, y, 0}, trap));
      if (exy < 1e-300) break;
      for (int z = 0; z < 400; ++z) s += exy * std::exp(-th.beta * trap.omega_par * z);
    }
  return s;
}

void expect_physical(const SpinVibDensityMatrix& rho, double trace) {
  EXPECT_LT(rho.hermiticity_defect(), 1e-12);
  EXPECT_NEAR(rho.trace(), trace, 1e-10);
  EXPECT_GT(rho.min_eigenvalue(), -1e-10);
}

SpinVibDensityMatrix pure(const std::vector<SpinLabel>& spins, int vmax, std::size_t spin, const VibState& v) {
  SpinVibDensityMatrix rho;
  rho.spins = spins;
  rho.vmax = vmax;
  const auto n = static_cast<Eigen::Index>(spins.size() * rho.vib_count());
  rho.rho = Eigen::MatrixXcd::Zero(n, n);
  const auto i = static_cast<Eigen::Index>(rho.index(spin, v));
  rho.rho(i, i) = 1;
  return rho;
}

}  // namespace

TEST(ThermalState, ZeroTemperatureLimit) {
  const TrapParams trap = rb85_trap();
  const auto rho = thermal_state(trap, ThermalSpec::from_temperature_uK(1e-3, trap), ideal_spins(levels()), 0, 3);
  EXPECT_NEAR(rho.population(0, {}), 1.0, 1e-12);
  expect_physical(rho, 1.0);
}

TEST(ThermalState, DarkCoefficientMatchesPartitionSum) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(20, trap);
  const auto rho = thermal_state(trap, th, ideal_spins(levels()), 0, 4, 1.0);
  const double z = brute_z(trap, th);
  EXPECT_NEAR(rho.population(0, {}), std::exp(-th.beta * energy({}, trap)) / z, 1e-12);
  EXPECT_NEAR(rho.trace() + rho.tail, 1.0, 1e-10);
  expect_physical(rho, rho.trace());
  EXPECT_THROW(thermal_state(trap, th, ideal_spins(levels()), 0, 4), NumericalError);
}

TEST(ThermalState, FirstOrderBracket) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(3, trap);
  const double bracket = 1 + 2 * std::exp(-th.beta * trap.omega_perp) + std::exp(-th.beta * trap.omega_par);
  const double e0 = std::exp(-th.beta * energy({}, trap));
  EXPECT_NEAR(partition_cutoff(1, trap, th), bracket * e0, 1e-14 * bracket * e0);
}

TEST(RamanIdeal, DarkStateUnchanged) {
  const auto spins = ideal_spins(levels());
  const auto rho = pure(spins, 2, 0, {});
  const auto out = raman_step_ideal(rho, uniform_profile(), orthonormal_targets(spins.size()));
  EXPECT_NEAR((out.rho - rho.rho).norm(), 0.0, 1e-15);
}

TEST(RamanIdeal, SingleModeTransfer) {
  const auto spins = ideal_spins(levels());
  const auto out = raman_step_ideal(pure(spins, 2, 0, {1, 0, 0}), single_axis_profile(Axis::x),
                                    orthonormal_targets(spins.size()));
  EXPECT_NEAR(out.population(1, {}), 1.0, 1e-15);
  expect_physical(out, 1.0);
}

TEST(RamanIdeal, RejectsOffSourceOrLossyInput) {
  const auto spins = ideal_spins(levels());
  const auto t = orthonormal_targets(spins.size());
  EXPECT_THROW(raman_step_ideal(pure(spins, 2, 1, {1, 0, 0}), uniform_profile(), t), std::invalid_argument);
  const CProfile lossy = [](const VibState&) { return CoefficientSet{0.5, 0.5, 0.5}; };
  EXPECT_THROW(raman_step_ideal(pure(spins, 2, 0, {1, 1, 1}), lossy, t), ConfigError);
}

TEST(RamanIdeal, ThermalStepMatchesFirstCutoff) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(3, trap);
  const auto spins = ideal_spins(levels());
  auto rho = thermal_state(trap, th, spins, 0, 5);
  rho = optical_pump(raman_step_ideal(rho, uniform_profile(), orthonormal_targets(spins.size())), PumpingMode::dephasing);
  const double z = brute_z(trap, th);
  EXPECT_NEAR(rho.population(0, {}), brute_cutoff(1, trap, th) / z, 1e-12);
  expect_physical(rho, 1.0 - rho.tail);
}

TEST(Ledger, ClosedFormResidual) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(20, trap);
  const auto spins = ideal_spins(levels());
  const CProfile skewed = [](const VibState& v) {
    CoefficientSet c{};
    double w[3] = {v.vx > 0 ? 0.3 : 0.0, v.vy > 0 ? 0.5 : 0.0, v.vz > 0 ? 0.8 : 0.0};
    const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    for (int i = 0; i < 3; ++i) c[static_cast<std::size_t>(i)] = std::polar(w[i] / n, 0.7 * i);
    return c;
  };
  for (int vmax = 1; vmax <= 4; ++vmax) {
    for (const CProfile& p : {uniform_profile(), single_axis_profile(Axis::y), skewed}) {
      auto rho = thermal_state(trap, th, spins, 0, vmax, 1.0);
      rho = optical_pump(raman_step_ideal(rho, p, orthonormal_targets(spins.size())), PumpingMode::dephasing);
      std::vector<double> pops(rho.vib_count());
      const Eigen::MatrixXcd vib = rho.vibrational();
      for (std::size_t k = 0; k < pops.size(); ++k) pops[k] = vib(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
      EXPECT_LT(ledger_check(pops, vmax, p, trap, th), 1e-12) << "vmax " << vmax;
    }
  }
}

TEST(Ledger, PureAxialCooling) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(3, trap);
  const auto spins = ideal_spins(levels());
  const auto before = thermal_state(trap, th, spins, 0, 5);
  const auto after = optical_pump(raman_step_ideal(before, single_axis_profile(Axis::z), orthonormal_targets(spins.size())),
                                  PumpingMode::dephasing);
  const auto m0 = before.marginals();
  const auto m1 = after.marginals();
  for (int a = 0; a < 2; ++a)
    for (std::size_t v = 0; v < m0[0].size(); ++v) EXPECT_NEAR(m1[static_cast<std::size_t>(a)][v], m0[static_cast<std::size_t>(a)][v], 1e-14);
  EXPECT_NEAR(m1[2][0], m0[2][0] + m0[2][1], 1e-14);
  for (std::size_t v = 1; v + 1 < m0[2].size(); ++v) EXPECT_NEAR(m1[2][v], m0[2][v + 1], 1e-14);
  EXPECT_NEAR(m1[2].back(), 0.0, 1e-15);
}

TEST(Pumping, FactorizedStateUnchanged) {
  const auto spins = ideal_spins(levels());
  auto rho = pure(spins, 1, 0, {});
  const auto i = static_cast<Eigen::Index>(rho.index(0, {0, 0, 0}));
  const auto j = static_cast<Eigen::Index>(rho.index(0, {1, 0, 0}));
  rho.rho(i, i) = 0.5;
  rho.rho(j, j) = 0.5;
  rho.rho(i, j) = 0.5;
  rho.rho(j, i) = 0.5;
  const auto out = optical_pump(rho, PumpingMode::coherent);
  EXPECT_NEAR((out.rho - rho.rho).norm(), 0.0, 1e-15);
}

TEST(Pumping, OrthonormalTargetsGiveDiagonalMixture) {
  const auto spins = ideal_spins(levels());
  auto rho = pure(spins, 1, 0, {1, 1, 1});
  const auto out = optical_pump(raman_step_ideal(rho, uniform_profile(), orthonormal_targets(spins.size())),
                                PumpingMode::coherent);
  EXPECT_LT(out.max_vibrational_coherence(), 1e-12);
  for (const VibState v : {VibState{0, 1, 1}, VibState{1, 0, 1}, VibState{1, 1, 0}}) EXPECT_NEAR(out.population(0, v), 1.0 / 3, 1e-14);
  expect_physical(out, 1.0);
}

TEST(Pumping, NonOrthogonalTargetsKeepCoherenceUnlessDephased) {
  const auto spins = ideal_spins(levels());
  TargetSpins t = orthonormal_targets(spins.size());
  t[1] = (t[0] + t[1]).normalized();
  const auto stepped = raman_step_ideal(pure(spins, 1, 0, {1, 1, 0}), uniform_profile(), t);
  const auto coherent = optical_pump(stepped, PumpingMode::coherent);
  const auto dephased = optical_pump(stepped, PumpingMode::dephasing);
  EXPECT_GT(coherent.max_vibrational_coherence(), 0.1);
  EXPECT_LT(dephased.max_vibrational_coherence(), 1e-15);
  expect_physical(coherent, 1.0);
  expect_physical(dephased, 1.0);
}

TEST(Protocol, SecondStepSixTermBracket) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(3, trap);
  ProtocolInputs in{trap, th, levels(), {}, {2, 2, 4}, uniform_profile(), {}};
  ProtocolConfig cfg;
  cfg.n_steps = 2;
  const auto r = run_protocol(cfg, in);
  ASSERT_EQ(r.size(), 3u);
  const double b = th.beta, p = trap.omega_perp, a = trap.omega_par;
  const double bracket = 1 + 2 * std::exp(-b * p) + std::exp(-b * a) + 3 * std::exp(-2 * b * p) +
                         2 * std::exp(-b * (p + a)) + std::exp(-2 * b * a);
  const double expected = bracket * std::exp(-b * energy({}, trap)) / brute_z(trap, th);
  EXPECT_NEAR(r[2].dark_population, expected, 1e-12);
  EXPECT_NEAR(r[2].prediction, expected, 1e-12);
  EXPECT_NEAR(r[1].dark_population, brute_cutoff(1, trap, th) / brute_z(trap, th), 1e-12);
}

TEST(Protocol, IdealRunMatchesTruncatedLedgerAndSaturates) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(3, trap);
  ProtocolInputs in{trap, th, levels(), {}, {2, 2, 4}, uniform_profile(), {}};
  ProtocolConfig cfg;
  cfg.n_steps = 15;
  const auto r = run_protocol(cfg, in);
  const double z = brute_z(trap, th);
  for (std::size_t n = 0; n < r.size(); ++n) {
    EXPECT_NEAR(r[n].dark_population, brute_cutoff(static_cast<int>(n), trap, th, 5) / z, 1e-12) << n;
    EXPECT_NEAR(r[n].dark_population, r[n].truncated_prediction, 1e-12);
    EXPECT_NEAR(r[n].trace + r[n].tail, 1.0, 1e-10);
    if (n > 0) EXPECT_GE(r[n].dark_population, r[n - 1].dark_population - 1e-15);
  }
  EXPECT_NEAR(r.back().dark_population, 1.0 - r.back().tail, 1e-10);
  EXPECT_GT(r.back().dark_population, 0.999);
}

TEST(Protocol, ZeroStepsReportsInitialState) {
  const TrapParams trap = rb85_trap();
  ProtocolInputs in{trap, ThermalSpec::from_temperature_uK(3, trap), levels(), {}, {2, 2, 4}, {}, {}};
  ProtocolConfig cfg;
  cfg.n_steps = 0;
  EXPECT_EQ(run_protocol(cfg, in).size(), 1u);
  cfg.n_steps = -1;
  EXPECT_THROW(run_protocol(cfg, in), ConfigError);
  cfg.n_steps = 1;
  cfg.raman = RamanMode::simulated;
  EXPECT_THROW(run_protocol(cfg, in), ConfigError);
}

TEST(RamanSimulated, ZeroDurationIsIdentity) {
  const TrapParams trap = rb85_trap();
  const auto spins = levels().ground_states();
  const auto rho = thermal_state(trap, ThermalSpec::from_temperature_uK(3, trap), spins, 2, 1, 1.0);
  const Generator g = build_generator(rho.basis(), scheme_for({2, 2, 4}), GeneratorOptions{});
  const auto out = raman_step_simulated(rho, g, 0.0, 2);
  EXPECT_NEAR((out.rho - rho.rho).norm(), 0.0, 1e-15);
}

TEST(RamanSimulated, OneStepGainNearIdealMap) {
  const TrapParams trap = rb85_trap();
  const ThermalSpec th = ThermalSpec::from_temperature_uK(20, trap);
  ProtocolInputs in{trap, th, levels(), scheme_for, {2, 2, 4}, {}, {}};
  ProtocolConfig cfg;
  cfg.n_steps = 1;
  cfg.vmax = 2;
  cfg.max_tail = 1.0;
  cfg.raman = RamanMode::simulated;
  const auto r = run_protocol(cfg, in);
  const double gain = r[1].dark_population / r[0].dark_population;
  const double ideal = r[1].truncated_prediction / r[0].truncated_prediction;
  EXPECT_GT(gain, 1.0);
  EXPECT_GE(gain / ideal, 0.5);
  EXPECT_LE(gain / ideal, 1.5);
  EXPECT_NEAR(r[1].trace, r[0].trace, 1e-10);
  RecordProperty("gain_ratio", std::to_string(gain / ideal));
}

TEST(Report, JsonKeys) {
  StepReport r;
  r.step = 3;
  r.marginals = {std::vector<double>{1}, std::vector<double>{1}, std::vector<double>{1}};
  const auto j = to_json(r);
  for (const char* k : {"step", "dark_population", "analytic_prediction", "mean_quanta", "truncation_tail", "marginals"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_FALSE(j.contains("pulse_duration"));
}
