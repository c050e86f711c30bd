#include <cmath>
#include <iostream>

#include <gtest/gtest.h>

#include "rsc/errors.hpp"
#include "rsc/hamiltonian.hpp"

using namespace rsc;

namespace {

constexpr double kGammaHz = 6.0666e6;
const double kHpf = 3035.732439e6 / kGammaHz;

TrapParams rb85_trap() { return TrapParams::from_si(200e3, 100e3, 84.911789738 * si::amu, 780.241e-9, kGammaHz); }

RamanScheme nominal_scheme(double delta = -1000, const SchemeOptions& opts = {}) {
  const TrapParams trap = rb85_trap();
  const auto [o2, o3] = balanced_rabi(trap, {2, 2, 4}, 1.0);
  return prepare_scheme(LevelScheme::rb85_d2(delta, kHpf), trap, {20, 1, o2, o3}, opts);
}

// sigma+ light shift of |F, M> for S = 1/2, J = 3/2 and a common detuning:
// only the electron spin is driven, |<3/2, m+1| d_+1 |1/2, m>|^2 = 1/4 (m = +1/2)
// or 1/12 (m = -1/2), weighted by the spin content of the hyperfine state.
double sigma_plus_closure(Manifold man, int M) {
  const double i2 = 5;  // 2I
  const double up = man == Manifold::upper ? (i2 + 1 + 2 * M) / (2 * (i2 + 1)) : (i2 + 1 - 2 * M) / (2 * (i2 + 1));
  return up * 0.25 + (1 - up) / 12.0;
}

}  // namespace

TEST(LevelScheme, Rb85Layout) {
  const LevelScheme l = LevelScheme::rb85_d2(-1000, kHpf);
  EXPECT_EQ(l.ground_states().size(), 12u);
  EXPECT_EQ(l.ground_states().front(), (SpinLabel{Manifold::upper, HalfInt(3), HalfInt(-3)}));
  EXPECT_NEAR(l.g_factor(Manifold::upper), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(l.g_factor(Manifold::lower), -1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(l.beam_detuning(0, 0, Manifold::upper), -1000);
  EXPECT_DOUBLE_EQ(l.beam_detuning(0, 0, Manifold::lower), -1000 - kHpf);
  EXPECT_DOUBLE_EQ(l.beam_detuning(2, 0, Manifold::lower), -1000);
  EXPECT_DOUBLE_EQ(l.beam_detuning(2, 0, Manifold::upper), -1000 + kHpf);
  EXPECT_THROW(LevelScheme::rb85_d2(-1000, kHpf, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(LevelScheme::rb85_d2(0, kHpf), ConfigError);
}

TEST(LightShift, MatchesSpinClosure) {
  const RamanScheme s = nominal_scheme();
  const double o0 = 20;
  EXPECT_NEAR(light_shift_upper(s.source, s.beams, s.levels), o0 * o0 / (4 * -1000.0) * sigma_plus_closure(Manifold::upper, 0), 1e-13);
  EXPECT_NEAR(s.delta_b, o0 * o0 / (4 * -1000.0) / 6.0, 1e-13);
  for (int M = -2; M <= 2; ++M) {
    const SpinLabel m{Manifold::lower, HalfInt(2), HalfInt(M)};
    EXPECT_NEAR(light_shift_lower(m, s.beams, s.levels), o0 * o0 / (4 * (-1000.0 - kHpf)) * sigma_plus_closure(Manifold::lower, M), 1e-13);
  }
  EXPECT_THROW(light_shift_upper(s.targets[0], s.beams, s.levels), std::invalid_argument);
}

TEST(LightShift, ZeemanCompensationMakesTargetsDegenerate) {
  const RamanScheme s = nominal_scheme();
  // The closure shift is linear in M, so the fitted field cancels it exactly.
  const double a = 400 / (4 * (-1000.0 - kHpf));
  EXPECT_NEAR(s.levels.zeeman.lower, a / 36, 1e-15);
  EXPECT_NEAR(s.levels.zeeman.upper, -s.levels.zeeman.lower, 1e-15);
  const double e0 = light_shift_lower(s.targets[0], s.beams, s.levels) + s.levels.zeeman_energy(s.targets[0]);
  for (const auto& t : s.targets) {
    EXPECT_NEAR(light_shift_lower(t, s.beams, s.levels) + s.levels.zeeman_energy(t), e0, 1e-14);
  }
  SchemeOptions off;
  off.zeeman_compensation = false;
  const RamanScheme bare = nominal_scheme(-1000, off);
  EXPECT_EQ(bare.levels.zeeman.lower, 0.0);
  EXPECT_NEAR(bare.delta_m, a * 10.0 / 72.0, 1e-14);
}

TEST(Scheme, CarrierTuningFollowsShifts) {
  const RamanScheme s = nominal_scheme();
  const TrapParams trap = rb85_trap();
  EXPECT_EQ(s.beams.carrier_offsets[0], 0.0);
  for (int j = 1; j < 4; ++j) {
    const double step = j == 3 ? trap.omega_par : trap.omega_perp;
    EXPECT_NEAR(s.beams.carrier_offsets[static_cast<std::size_t>(j)],
                kHpf + step - (s.zeeman_m - s.zeeman_b) - s.delta_m + s.delta_b, 1e-12);
    EXPECT_NEAR(s.carrier_detuning(j), s.beams.carrier_offsets[static_cast<std::size_t>(j)] - kHpf, 1e-12);
  }
  EXPECT_EQ(s.source, (SpinLabel{Manifold::upper, HalfInt(3), HalfInt(0)}));
  ASSERT_EQ(s.targets.size(), 3u);
}

TEST(Scheme, BalancedRabiEqualizesSidebands) {
  const RamanScheme s = nominal_scheme();
  const VibState v{2, 2, 4};
  std::array<double, 3> w{};
  for (Axis a : kAxes) {
    double sum = 0;
    for (int M = -2; M <= 2; ++M) sum += std::norm(raman_coupling({s.source, v}, {Manifold::lower, HalfInt(2), HalfInt(M)}, a, s));
    w[static_cast<std::size_t>(index(a))] = std::sqrt(sum);
  }
  EXPECT_NEAR(w[1] / w[0], 1.0, 1e-10);
  EXPECT_NEAR(w[2] / w[0], 1.0, 1e-10);
  EXPECT_THROW(balanced_rabi(rb85_trap(), {0, 1, 1}, 1.0), ConfigError);
}

TEST(Scheme, ControlHierarchyWarning) {
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  prepare_scheme(LevelScheme::rb85_d2(-1000, kHpf), rb85_trap(), {20, 1, 1, 0.5});
  EXPECT_TRUE(warnings.empty());
  prepare_scheme(LevelScheme::rb85_d2(-1000, kHpf), rb85_trap(), {2, 1, 1, 0.5});
  EXPECT_EQ(warnings.size(), 3u);
  set_warning_sink([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
}

TEST(Coupling, LinearInLambDickeAndSqrtV) {
  const RamanScheme s = nominal_scheme();
  const SpinLabel m{Manifold::lower, HalfInt(2), HalfInt(1)};
  const auto c1 = raman_coupling({s.source, {1, 1, 1}}, m, Axis::x, s);
  const auto c4 = raman_coupling({s.source, {4, 1, 1}}, m, Axis::x, s);
  ASSERT_GT(std::abs(c1), 0.0);
  EXPECT_NEAR(std::abs(c4 / c1), 2.0, 1e-12);
  EXPECT_EQ(raman_coupling({s.source, {0, 1, 1}}, m, Axis::x, s), std::complex<double>(0.0));
  const auto alpha = recoil_arguments(s.beams, s.trap, 1, 0);
  EXPECT_NEAR(alpha[0], (2 / std::sqrt(3.0)) * lamb_dicke(s.trap, Axis::x), 1e-15);
  EXPECT_NEAR(alpha[1], 0.0, 1e-15);
  EXPECT_NEAR(alpha[2], 0.0, 1e-15);
  // Spin part times i*alpha*sqrt(v) in the linearized displacement.
  const auto spin = two_photon_spin(m, s.source, 1, 0, s.beams, s.levels);
  EXPECT_NEAR(std::abs(c1 - spin * std::complex<double>(0, alpha[0])), 0.0, 1e-15);
}

TEST(Coupling, TwoPhotonSpinIsHermitian) {
  const RamanScheme s = nominal_scheme();
  const auto spins = s.levels.ground_states();
  for (const auto& a : spins)
    for (const auto& b : spins)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const auto ab = two_photon_spin(a, b, j, k, s.beams, s.levels);
          const auto ba = two_photon_spin(b, a, k, j, s.beams, s.levels);
          ASSERT_NEAR(std::abs(ab - std::conj(ba)), 0.0, 1e-15);
        }
}

TEST(Basis, Builders) {
  const LevelScheme l = LevelScheme::rb85_d2(-1000, kHpf);
  const VibState v{2, 2, 4};
  const Basis scheme = make_scheme_basis(l, v);
  EXPECT_EQ(scheme.size(), 7u + 5u + 3u * 5u);
  EXPECT_TRUE(scheme.find({{Manifold::lower, HalfInt(2), HalfInt(0)}, {2, 2, 3}}));
  EXPECT_FALSE(scheme.find({{Manifold::upper, HalfInt(3), HalfInt(0)}, {2, 2, 3}}));
  const Basis reduced = make_reduced_basis(l, v);
  EXPECT_EQ(reduced.size(), 7u + 15u);
  const Basis box = make_box_basis(l, {0, 1, 2}, 1);
  EXPECT_EQ(box.size(), 12u * 2 * 3 * 3);
  const Basis prod = make_product_basis(l.ground_states(), 2);
  EXPECT_EQ(prod.size(), 12u * 27);
  EXPECT_EQ(prod.max_quanta(), 2);
  EXPECT_THROW(make_product_basis(l.ground_states(), 10, 1000), NumericalError);
  EXPECT_THROW(scheme.index_of({{Manifold::upper, HalfInt(3), HalfInt(0)}, {9, 9, 9}}), std::out_of_range);
}

class GeneratorTest : public ::testing::TestWithParam<std::tuple<GeneratorKind, Frame, DisplacementMode, bool>> {};

TEST_P(GeneratorTest, HermitianWithStaticDiagonal) {
  const auto [kind, frame, mode, box] = GetParam();
  const RamanScheme s = nominal_scheme();
  const LevelScheme& l = s.levels;
  const Basis basis = kind == GeneratorKind::reduced ? make_reduced_basis(l, {2, 2, 4})
                      : box                          ? make_box_basis(l, {1, 1, 2}, 1)
                                                     : make_scheme_basis(l, {2, 2, 4});
  GeneratorOptions opts{kind, frame, mode};
  const Generator g = build_generator(basis, s, opts);
  for (double t : {0.0, 1.3, 377.0, 12345.6}) EXPECT_LT(g.hermiticity_defect(t), 1e-12) << t;
  for (const auto& e : g.entries()) {
    if (e.target == e.source) EXPECT_EQ(e.rotating_phase, 0.0);
    // Nothing oscillating at the hyperfine frequency survives.
    EXPECT_LT(std::abs(e.rotating_phase), 5.0);
  }
  const auto j = g.to_json();
  EXPECT_EQ(j["dimension"].get<std::size_t>(), basis.size());
  EXPECT_EQ(j["entries"].size(), g.entries().size());
}

INSTANTIATE_TEST_SUITE_P(
    Variants, GeneratorTest,
    ::testing::Values(std::make_tuple(GeneratorKind::full, Frame::rotating, DisplacementMode::linearized, false),
                      std::make_tuple(GeneratorKind::full, Frame::lab, DisplacementMode::linearized, false),
                      std::make_tuple(GeneratorKind::full, Frame::rotating, DisplacementMode::exact, false),
                      std::make_tuple(GeneratorKind::full, Frame::rotating, DisplacementMode::linearized, true),
                      std::make_tuple(GeneratorKind::reduced, Frame::rotating, DisplacementMode::linearized, false),
                      std::make_tuple(GeneratorKind::reduced, Frame::lab, DisplacementMode::exact, false)));

TEST(Generator, RotatingFrameRemovesResonantPhase) {
  const RamanScheme s = nominal_scheme();
  const VibState v{2, 2, 4};
  const Basis basis = make_reduced_basis(s.levels, v);
  const Generator g = build_generator(basis, s, {GeneratorKind::reduced, Frame::rotating, DisplacementMode::linearized});
  const std::size_t b = basis.index_of({s.source, v});
  int couplings = 0;
  for (const auto& e : g.entries()) {
    if (e.source != b || e.target == b) continue;
    const auto& t = basis[e.target];
    if (t.spin.manifold != Manifold::lower) continue;
    ++couplings;
    // Resonant up to the light-shift spread of the individual target sublevels.
    EXPECT_LT(std::abs(e.rotating_phase), 1e-3);
  }
  EXPECT_GT(couplings, 0);
}

TEST(Generator, ControlTermsOptIn) {
  SchemeOptions with;
  with.control_terms = true;
  const RamanScheme a = nominal_scheme();
  const RamanScheme b = nominal_scheme(-1000, with);
  const Basis basis = make_scheme_basis(a.levels, {2, 2, 4});
  const auto ga = build_generator(basis, a, {});
  const auto gb = build_generator(basis, b, {});
  EXPECT_GT(gb.entries().size(), ga.entries().size());
  EXPECT_NE(a.delta_b, b.delta_b);
}

TEST(Generator, RestrictionAndShift) {
  const RamanScheme s = nominal_scheme();
  const Basis basis = make_scheme_basis(s.levels, {1, 1, 1});
  const Generator g = build_generator(basis, s, {});
  const Generator r = g.restricted({3, 0});
  EXPECT_EQ(r.dimension(), 2u);
  EXPECT_EQ(r.basis()[0], basis[3]);
  const Eigen::MatrixXcd full = g.matrix(2.0);
  const Eigen::MatrixXcd sub = r.matrix(2.0);
  EXPECT_NEAR(std::abs(sub(0, 1) - full(3, 0)), 0, 1e-15);
  const Generator shifted = g.with_diagonal_shift(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.dimension()), 0.5));
  EXPECT_NEAR((shifted.matrix(1.0) - g.matrix(1.0) - 0.5 * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(g.dimension()), static_cast<Eigen::Index>(g.dimension()))).norm(), 0, 1e-14);
}
