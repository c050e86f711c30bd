#include "rsc/geometry.hpp"

#include <cmath>
#include <string>

#include "rsc/errors.hpp"

namespace rsc {

namespace {

const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

Vec3 canonical_direction(int j) {
  static const std::array<Vec3, kBeams> dirs{
      Vec3(1, 1, 1) * kInvSqrt3, Vec3(-1, 1, 1) * kInvSqrt3,
      Vec3(1, -1, 1) * kInvSqrt3, Vec3(1, 1, -1) * kInvSqrt3};
  return dirs[static_cast<std::size_t>(j)];
}

// Polar factor of m: the closest orthogonal matrix.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

void BeamSet::validate(double tol) const {
  for (int j = 0; j < kBeams; ++j) {
    const auto& k = directions[static_cast<std::size_t>(j)];
    if (std::abs(k.norm() - 1.0) > tol) {
      throw GeometryError("beam " + std::to_string(j) + " direction is not a unit vector");
    }
    const auto& e = polarizations[static_cast<std::size_t>(j)];
    if (e.squaredNorm() == 0.0) continue;
    if (std::abs(e.norm() - 1.0) > tol) {
      throw GeometryError("beam " + std::to_string(j) + " polarization is not normalized");
    }
    if (std::abs(e.dot(k.cast<std::complex<double>>())) > tol) {
      throw GeometryError("beam " + std::to_string(j) + " polarization is not transverse");
    }
  }
}

BeamSet canonical_beams() {
  BeamSet b;
  for (int j = 0; j < kBeams; ++j) {
    b.directions[static_cast<std::size_t>(j)] = canonical_direction(j);
    b.polarizations[static_cast<std::size_t>(j)] = CVec3::Zero();
  }
  return b;
}

std::array<Vec3, 3> recoil_vectors(const BeamSet& beams, double k0) {
  for (int j = 0; j < kBeams; ++j) {
    if ((beams.directions[static_cast<std::size_t>(j)] - canonical_direction(j)).norm() > 1e-9) {
      throw GeometryError("beam directions are not the canonical octant bisectrices");
    }
  }
  std::array<Vec3, 3> q;
  for (int j = 1; j < kBeams; ++j) {
    q[static_cast<std::size_t>(j - 1)] = k0 * (beams.directions[static_cast<std::size_t>(j)] - beams.directions[0]);
  }
  return q;
}

std::array<Vec3, 3> control_polarizations(const BeamSet& beams) {
  std::array<Vec3, 3> k;
  for (int j = 0; j < 3; ++j) {
    k[static_cast<std::size_t>(j)] = beams.directions[static_cast<std::size_t>(j + 1)].normalized();
  }
  const Vec3 ref = beams.directions[0].normalized();

  // Rotate a frame R = [e1 e2 e3] until e_j . k_j = 0 for every j. Newton
  // steps act on a left rotation exp([w]x) R; the Jacobian row j is
  // (e_j x k_j)^T. Seeds are a fixed list of frames.
  std::array<Eigen::Matrix3d, 4> seeds;
  seeds[0].setIdentity();
  seeds[1] = Eigen::AngleAxisd(0.5, Vec3(1, 0, 0)).toRotationMatrix();
  seeds[2] = Eigen::AngleAxisd(0.5, Vec3(0, 1, 0)).toRotationMatrix();
  seeds[3] = Eigen::AngleAxisd(0.5, Vec3(0, 0, 1)).toRotationMatrix();

  for (const auto& seed : seeds) {
    Eigen::Matrix3d r = seed;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      Vec3 f;
      Eigen::Matrix3d jac;
      for (int j = 0; j < 3; ++j) {
        const Vec3 e = r.col(j);
        f(j) = e.dot(k[static_cast<std::size_t>(j)]);
        jac.row(j) = e.cross(k[static_cast<std::size_t>(j)]).transpose();
      }
      if (f.norm() < 1e-15) {
        converged = true;
        break;
      }
      Eigen::FullPivLU<Eigen::Matrix3d> lu(jac);
      if (!lu.isInvertible()) break;
      const Vec3 w = -lu.solve(f);
      if (!w.allFinite()) break;
      const double angle = w.norm();
      if (angle > 0) r = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix() * r;
      r = orthonormalize(r);
      if (it > 60 && f.norm() < 1e-13) {
        converged = true;
        break;
      }
    }
    if (!converged) continue;

    std::array<Vec3, 3> e;
    double worst = 0;
    for (int j = 0; j < 3; ++j) {
      e[static_cast<std::size_t>(j)] = r.col(j);
      worst = std::max(worst, std::abs(r.col(j).dot(k[static_cast<std::size_t>(j)])));
    }
    if (worst > 1e-12) continue;
    for (auto& v : e) {
      const double s = v.dot(ref);
      if (s < -1e-12 || (std::abs(s) <= 1e-12 && v.sum() < 0)) v = -v;
    }
    return e;
  }
  throw GeometryError("beam set admits no orthonormal transverse polarization frame");
}

QuantizationFrame QuantizationFrame::about(const Vec3& axis) {
  QuantizationFrame f;
  f.z = axis.normalized();
  // Lab x projected onto the plane, unless nearly parallel.
  Vec3 seed = Vec3::UnitX();
  if (std::abs(f.z.dot(seed)) > 0.9) seed = Vec3::UnitY();
  f.x = (seed - seed.dot(f.z) * f.z).normalized();
  f.y = f.z.cross(f.x);
  return f;
}

CVec3 QuantizationFrame::spherical_basis(int q) const {
  using C = std::complex<double>;
  const double s = 1.0 / std::sqrt(2.0);
  switch (q) {
    case 0: return z.cast<C>();
    case 1: return -s * (x.cast<C>() + C(0, 1) * y.cast<C>());
    case -1: return s * (x.cast<C>() - C(0, 1) * y.cast<C>());
    default: throw std::invalid_argument("spherical index must be -1, 0 or +1");
  }
}

Spherical spherical_components(const CVec3& e, const Vec3& quantization_axis) {
  const auto f = QuantizationFrame::about(quantization_axis);
  Spherical c;
  for (int q = -1; q <= 1; ++q) {
    // c_q = e_q^* . e ; Eigen's dot conjugates the first argument
    c[static_cast<std::size_t>(q + 1)] = f.spherical_basis(q).dot(e);
  }
  return c;
}

CVec3 sigma_plus(const Vec3& axis) { return QuantizationFrame::about(axis).spherical_basis(1); }

std::array<double, kBeams> carrier_frequencies(const ResonanceTargets& r) {
  std::array<double, kBeams> w{};
  for (int j = 1; j < kBeams; ++j) {
    const double step = axis_of_beam(j) == Axis::z ? r.omega_par : r.omega_perp;
    const double omega_mb = -r.hyperfine_splitting - step + (r.zeeman_m - r.zeeman_b);
    w[static_cast<std::size_t>(j)] = -omega_mb - r.delta_m + r.delta_b;
  }
  return w;
}

}  // namespace rsc
