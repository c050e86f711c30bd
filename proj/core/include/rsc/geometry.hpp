#pragma once

// Four-beam excitation geometry: the depopulating beam along the main octant
// bisectrix, three control beams along the adjoining ones, their polarizations
// and carrier tuning.

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "rsc/trap.hpp"

namespace rsc {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Spherical = std::array<std::complex<double>, 3>;  // (c_-1, c_0, c_+1)

inline constexpr int kBeams = 4;

struct BeamSet {
  std::array<Vec3, kBeams> directions;
  std::array<CVec3, kBeams> polarizations;
  std::array<double, kBeams> carrier_offsets{};  // omega_j - omega_0, units of gamma
  std::array<double, kBeams> reduced_rabi{};     // units of gamma

  /// Unit norms and transversality; polarizations are skipped while still zero.
  void validate(double tol = 1e-9) const;
};

/// Control beam j = 1, 2, 3 addresses axis x, y, z.
constexpr Axis axis_of_beam(int j) { return static_cast<Axis>(j - 1); }
constexpr int beam_of_axis(Axis a) { return index(a) + 1; }

/// Directions only; polarizations zero, carriers and Rabi amplitudes zero.
BeamSet canonical_beams();

/// k0 (k_j - k_0) for j = 1, 2, 3. Throws GeometryError unless the
/// directions are the canonical set within 1e-9.
std::array<Vec3, 3> recoil_vectors(const BeamSet& beams, double k0);

/// Real orthonormal triad with e_j transverse to k_j. Throws GeometryError
/// when no such frame exists.
std::array<Vec3, 3> control_polarizations(const BeamSet& beams);

/// Right-handed frame (x', y', z') with z' along the quantization axis.
struct QuantizationFrame {
  Vec3 x, y, z;
  static QuantizationFrame about(const Vec3& axis);
  /// e_q for q = -1, 0, +1.
  CVec3 spherical_basis(int q) const;
};

Spherical spherical_components(const CVec3& e, const Vec3& quantization_axis);

/// -(x' + i y')/sqrt(2) about the given axis.
CVec3 sigma_plus(const Vec3& axis);

/// Quantities entering the carrier tuning; all in units of gamma.
struct ResonanceTargets {
  double hyperfine_splitting = 0;  // Delta_hpf
  double delta_b = 0;              // light shift of the base state
  double delta_m = 0;              // mean light shift of the three target states
  double zeeman_b = 0;             // Zeeman energy of the base state
  double zeeman_m = 0;             // mean Zeeman energy of the target states
  double omega_perp = 0;
  double omega_par = 0;
};

/// omega_j - omega_0 for j = 0..3 (the first entry is 0).
std::array<double, kBeams> carrier_frequencies(const ResonanceTargets& r);

}  // namespace rsc
