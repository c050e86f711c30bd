#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rsc/errors.hpp"
#include "rsc/geometry.hpp"

using namespace rsc;

namespace {

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

// Rotating the lab triad about (1,1,1) by +-arccos(1/4) makes each axis
// transverse to its control beam; the components are 1/2, phi/2, (phi-1)/2.
std::array<Vec3, 3> golden_frame(int sign) {
  const Vec3 n = Vec3::Ones().normalized();
  const double c = 0.25;
  const double s = sign * std::sqrt(1 - c * c);
  std::array<Vec3, 3> e;
  for (int i = 0; i < 3; ++i) {
    const Vec3 v = Vec3::Unit(i);
    e[static_cast<std::size_t>(i)] = c * v + s * n.cross(v) + (1 - c) * n.dot(v) * n;
  }
  return e;
}

}  // namespace

TEST(Geometry, CanonicalDirections) {
  const BeamSet b = canonical_beams();
  const double r3 = std::sqrt(3.0);
  EXPECT_TRUE(b.directions[0].isApprox(Vec3(1, 1, 1) / r3, 1e-15));
  EXPECT_TRUE(b.directions[1].isApprox(Vec3(-1, 1, 1) / r3, 1e-15));
  EXPECT_TRUE(b.directions[2].isApprox(Vec3(1, -1, 1) / r3, 1e-15));
  EXPECT_TRUE(b.directions[3].isApprox(Vec3(1, 1, -1) / r3, 1e-15));
  for (const auto& d : b.directions) EXPECT_NEAR(d.norm(), 1.0, 1e-15);
  const Vec3 diff = b.directions[0] - b.directions[1];
  EXPECT_NEAR(degrees(std::acos(diff.normalized().dot(b.directions[0]))), 54.7356103172, 1e-9);
  for (int i = 1; i <= 3; ++i) {
    EXPECT_NEAR(b.directions[0].dot(b.directions[static_cast<std::size_t>(i)]), 1.0 / 3.0, 1e-15);
    for (int j = i + 1; j <= 3; ++j) {
      EXPECT_NEAR(degrees(std::acos(b.directions[static_cast<std::size_t>(i)].dot(b.directions[static_cast<std::size_t>(j)]))),
                  109.4712206345, 1e-9);
    }
  }
}

TEST(Geometry, RecoilTriad) {
  const BeamSet b = canonical_beams();
  for (double k0 : {1.0, 8.05e6}) {
    const auto r = recoil_vectors(b, k0);
    for (int i = 0; i < 3; ++i) {
      const Vec3& v = r[static_cast<std::size_t>(i)];
      EXPECT_NEAR(v.norm() / k0, 2 / std::sqrt(3.0), 1e-12);
      EXPECT_NEAR(v.normalized().dot(-Vec3::Unit(i)), 1.0, 1e-12);
      for (int j = i + 1; j < 3; ++j) EXPECT_NEAR(v.dot(r[static_cast<std::size_t>(j)]) / (k0 * k0), 0.0, 1e-12);
    }
  }
  EXPECT_EQ(axis_of_beam(1), Axis::x);
  EXPECT_EQ(axis_of_beam(3), Axis::z);
  EXPECT_EQ(beam_of_axis(Axis::y), 2);
}

TEST(Geometry, RecoilRejectsOtherDirections) {
  BeamSet b = canonical_beams();
  b.directions[2] = Vec3(1, -1, 1.001).normalized();
  EXPECT_THROW(recoil_vectors(b, 1.0), GeometryError);
}

TEST(Geometry, ControlPolarizationsOrthonormalAndTransverse) {
  const BeamSet b = canonical_beams();
  const auto e = control_polarizations(b);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(e[static_cast<std::size_t>(i)].dot(b.directions[static_cast<std::size_t>(i + 1)]), 0.0, 1e-12);
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(e[static_cast<std::size_t>(i)].dot(e[static_cast<std::size_t>(j)]), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Geometry, ControlPolarizationsMatchGoldenFrame) {
  const auto e = control_polarizations(canonical_beams());
  double best = 1e9;
  for (int sign : {1, -1}) {
    const auto g = golden_frame(sign);
    double worst = 0;
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, 1 - std::abs(e[i].dot(g[i])));
    best = std::min(best, worst);
  }
  EXPECT_LT(best, 1e-12);
  const double phi = std::numbers::phi;
  for (const auto& v : e) {
    std::array<double, 3> a{std::abs(v.x()), std::abs(v.y()), std::abs(v.z())};
    std::sort(a.begin(), a.end());
    EXPECT_NEAR(a[0], (phi - 1) / 2, 1e-12);
    EXPECT_NEAR(a[1], 0.5, 1e-12);
    EXPECT_NEAR(a[2], phi / 2, 1e-12);
  }
}

TEST(Geometry, ControlPolarizationsInfeasible) {
  BeamSet b = canonical_beams();
  // Three coplanar control beams at 120 degrees leave only the common normal.
  b.directions[1] = Vec3(1, 0, 0);
  b.directions[2] = Vec3(-0.5, std::sqrt(3.0) / 2, 0);
  b.directions[3] = Vec3(-0.5, -std::sqrt(3.0) / 2, 0);
  EXPECT_NO_THROW(control_polarizations(b));
  b.directions[1] = Vec3(0, 0, 1);
  b.directions[2] = Vec3(0, 0, 1);
  b.directions[3] = Vec3(0, 0, 1);
  EXPECT_THROW(control_polarizations(b), GeometryError);
}

TEST(Geometry, SphericalComponents) {
  const Vec3 z(0, 0, 1);
  const auto c0 = spherical_components(CVec3(0, 0, 1), z);
  EXPECT_NEAR(std::abs(c0[1] - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(c0[0]) + std::abs(c0[2]), 0, 1e-15);
  const CVec3 ep = -(CVec3(1, 0, 0) + std::complex<double>(0, 1) * CVec3(0, 1, 0)) / std::sqrt(2.0);
  const auto cp = spherical_components(ep, z);
  EXPECT_NEAR(std::abs(cp[2] - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(cp[0]) + std::abs(cp[1]), 0, 1e-15);

  const BeamSet b = canonical_beams();
  const auto s = spherical_components(sigma_plus(b.directions[0]), b.directions[0]);
  EXPECT_NEAR(std::abs(s[2]), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s[0]) + std::abs(s[1]), 0.0, 1e-14);
  EXPECT_NEAR(sigma_plus(b.directions[0]).dot(b.directions[0].cast<std::complex<double>>()).real(), 0, 1e-15);
}

TEST(Geometry, QuantizationFrameIsRightHanded) {
  for (const Vec3& axis : {Vec3(1, 1, 1).normalized(), Vec3(1, 0, 0), Vec3(0, 0, -1)}) {
    const auto f = QuantizationFrame::about(axis);
    EXPECT_NEAR(f.x.cross(f.y).dot(f.z), 1.0, 1e-14);
    EXPECT_TRUE(f.z.isApprox(axis, 1e-14));
  }
}

TEST(Geometry, SphericalExpansionIsComplete) {
  const Vec3 axis = Vec3(1, 1, 1).normalized();
  const CVec3 e = CVec3(std::complex<double>(0.3, 0.1), 0.5, std::complex<double>(-0.2, 0.7)).normalized();
  const auto c = spherical_components(e, axis);
  const auto f = QuantizationFrame::about(axis);
  CVec3 back = CVec3::Zero();
  for (int q = -1; q <= 1; ++q) back += c[static_cast<std::size_t>(q + 1)] * f.spherical_basis(q);
  EXPECT_NEAR((back - e).norm(), 0.0, 1e-14);
}

TEST(Geometry, CarrierFrequencies) {
  ResonanceTargets r;
  r.hyperfine_splitting = 500;
  r.omega_perp = 0.033;
  r.omega_par = 0.016;
  auto w = carrier_frequencies(r);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[3], 500 + 0.016, 1e-12);
  EXPECT_NEAR(w[1], 500 + 0.033, 1e-12);
  EXPECT_EQ(w[1], w[2]);
  ResonanceTargets shifted = r;
  shifted.delta_b = 0.2;
  shifted.delta_m = -0.05;
  const auto ws = carrier_frequencies(shifted);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_NEAR(ws[j] - w[j], shifted.delta_b - shifted.delta_m, 1e-12);
}

TEST(Geometry, BeamSetValidation) {
  BeamSet b = canonical_beams();
  EXPECT_NO_THROW(b.validate());
  b.polarizations[0] = CVec3(1, 0, 0);
  EXPECT_THROW(b.validate(), GeometryError);
  b.polarizations[0] = sigma_plus(b.directions[0]);
  EXPECT_NO_THROW(b.validate());
}
