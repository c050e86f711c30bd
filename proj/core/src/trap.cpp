#include "rsc/trap.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rsc/errors.hpp"

namespace rsc {

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

void TrapParams::validate() const {
  if (!(omega_perp > 0) || !(omega_par > 0)) throw ConfigError("trap frequencies must be positive");
  if (!(mass > 0)) throw ConfigError("atomic mass must be positive");
  if (!(k0 > 0)) throw ConfigError("optical wavenumber must be positive");
  if (!(gamma > 0)) throw ConfigError("decay rate must be positive");
}

TrapParams TrapParams::from_si(double omega_perp_hz, double omega_par_hz, double mass_kg,
                               double wavelength_m, double gamma_hz) {
  if (!(gamma_hz > 0)) throw ConfigError("gamma_hz must be positive");
  if (!(wavelength_m > 0)) throw ConfigError("wavelength must be positive");
  TrapParams t;
  t.omega_perp = omega_perp_hz / gamma_hz;
  t.omega_par = omega_par_hz / gamma_hz;
  t.mass = mass_kg;
  t.k0 = si::two_pi / wavelength_m;
  t.gamma = si::two_pi * gamma_hz;
  t.validate();
  return t;
}

bool VibState::valid(int vmax) const {
  return vx >= 0 && vy >= 0 && vz >= 0 && vx <= vmax && vy <= vmax && vz <= vmax;
}

VibState VibState::lowered(Axis a) const {
  VibState v = *this;
  v[a] -= 1;
  return v;
}

VibState VibState::raised(Axis a) const {
  VibState v = *this;
  v[a] += 1;
  return v;
}

std::string VibState::str() const {
  std::ostringstream os;
  os << '(' << vx << ',' << vy << ',' << vz << ')';
  return os.str();
}

void ThermalSpec::validate() const {
  if (!(beta > 0)) throw ConfigError("inverse temperature must be positive");
}

ThermalSpec ThermalSpec::from_temperature_uK(double temperature_uK, const TrapParams& trap) {
  if (!(temperature_uK > 0)) throw ConfigError("temperature must be positive");
  const double kT = si::k_boltzmann * temperature_uK * 1e-6;
  return ThermalSpec{si::hbar * trap.gamma / kT};
}

double energy(const VibState& v, const TrapParams& trap) {
  return trap.omega_par * (v.vz + 0.5) + trap.omega_perp * (v.vx + v.vy + 1.0);
}

double lamb_dicke(const TrapParams& trap, Axis axis) {
  const double omega_si = trap.omega(axis) * trap.gamma;
  return trap.k0 * std::sqrt(si::hbar / (2.0 * trap.mass * omega_si));
}

bool check_lamb_dicke_regime(const TrapParams& trap) {
  bool ok = true;
  for (Axis a : {Axis::x, Axis::z}) {
    const double eta = lamb_dicke(trap, a);
    if (eta >= 1.0) {
      warn("Lamb-Dicke factor " + std::to_string(eta) + " on axis " + axis_name(a) + " is not small");
      ok = false;
    }
  }
  return ok;
}

double mean_occupation(const TrapParams& trap, const ThermalSpec& thermal, Axis axis) {
  return 1.0 / std::expm1(thermal.beta * trap.omega(axis));
}

double occupation_sigma(const TrapParams& trap, const ThermalSpec& thermal, Axis axis) {
  const double n = mean_occupation(trap, thermal, axis);
  return std::sqrt(n * (n + 1.0));
}

double partition_function(const TrapParams& trap, const ThermalSpec& thermal) {
  double z = 1.0;
  for (Axis a : kAxes) {
    const double x = thermal.beta * trap.omega(a);
    z *= std::exp(-0.5 * x) / -std::expm1(-x);
  }
  return z;
}

double free_energy(const TrapParams& trap, const ThermalSpec& thermal) {
  return -std::log(partition_function(trap, thermal)) / thermal.beta;
}

double boltzmann_weight(const VibState& v, const TrapParams& trap, const ThermalSpec& thermal) {
  double w = 1.0;
  for (Axis a : kAxes) {
    const double x = thermal.beta * trap.omega(a);
    w *= -std::expm1(-x) * std::exp(-x * v[a]);
  }
  return w;
}

double partition_cutoff(int n, const TrapParams& trap, const ThermalSpec& thermal) {
  if (n < 0) throw std::invalid_argument("partition cutoff order must be non-negative");
  const double xp = std::exp(-thermal.beta * trap.omega_perp);
  const double xz = std::exp(-thermal.beta * trap.omega_par);
  const double e0 = std::exp(-thermal.beta * energy(VibState{}, trap));
  double sum = 0.0;
  for (int s = 0; s <= n; ++s) {
    // vx + vy = s - vz carries multiplicity s - vz + 1
    double shell = 0.0;
    double pz = 1.0;
    for (int vz = 0; vz <= s; ++vz) {
      const int r = s - vz;
      shell += (r + 1) * std::pow(xp, r) * pz;
      pz *= xz;
    }
    sum += shell;
  }
  return e0 * sum;
}

double truncation_tail(int vmax, const TrapParams& trap, const ThermalSpec& thermal,
                       bool emit_warning) {
  double inside = 1.0;
  for (Axis a : kAxes) {
    inside *= -std::expm1(-thermal.beta * trap.omega(a) * (vmax + 1));
  }
  const double tail = 1.0 - inside;
  if (emit_warning && tail > 1e-3) {
    warn("thermal weight " + std::to_string(tail) + " lies beyond vmax = " + std::to_string(vmax));
  }
  return tail;
}

double velocity_spread(const TrapParams& trap, Axis axis) {
  return std::sqrt(si::hbar * trap.omega(axis) * trap.gamma / (2.0 * trap.mass));
}

namespace {

Eigen::MatrixXcd exact_displacement(double alpha, int n) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (int v = 1; v < n; ++v) {
    x(v, v - 1) = std::sqrt(static_cast<double>(v));
    x(v - 1, v) = x(v, v - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
  const Eigen::MatrixXd& u = es.eigenvectors();
  Eigen::VectorXcd ph(n);
  for (int k = 0; k < n; ++k) ph(k) = std::polar(1.0, alpha * es.eigenvalues()(k));
  return u.cast<std::complex<double>>() * ph.asDiagonal() * u.transpose().cast<std::complex<double>>();
}

std::complex<double> linearized(int v_from, int v_to, double alpha) {
  if (v_from == v_to) return 1.0;
  if (std::abs(v_from - v_to) == 1) {
    return {0.0, alpha * std::sqrt(static_cast<double>(std::max(v_from, v_to)))};
  }
  return 0.0;
}

}  // namespace

std::complex<double> displacement_element(int v_from, int v_to, double alpha, DisplacementMode mode) {
  if (v_from < 0 || v_to < 0) throw std::invalid_argument("vibrational quantum numbers must be >= 0");
  if (mode == DisplacementMode::linearized) return linearized(v_from, v_to, alpha);
  const int n = std::max(v_from, v_to) + 1 + kDisplacementPadding;
  return exact_displacement(alpha, n)(v_to, v_from);
}

DisplacementTable::DisplacementTable(double alpha, int vmax, DisplacementMode mode)
    : alpha_(alpha), vmax_(vmax), mode_(mode) {
  if (vmax < 0) throw std::invalid_argument("vmax must be >= 0");
  if (mode == DisplacementMode::exact) {
    m_ = exact_displacement(alpha, vmax + 1 + kDisplacementPadding).topLeftCorner(vmax + 1, vmax + 1);
  } else {
    m_.resize(vmax + 1, vmax + 1);
    for (int i = 0; i <= vmax; ++i)
      for (int j = 0; j <= vmax; ++j) m_(i, j) = linearized(j, i, alpha);
  }
}

std::complex<double> DisplacementTable::operator()(int v_to, int v_from) const {
  if (v_to < 0 || v_from < 0 || v_to > vmax_ || v_from > vmax_) {
    throw std::out_of_range("displacement table index out of range");
  }
  return m_(v_to, v_from);
}

}  // namespace rsc
