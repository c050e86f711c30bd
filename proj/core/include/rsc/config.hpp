#pragma once

// Flat run configuration with unit-suffixed keys, presets, and the
// conversion into the model's natural units.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsc/dynamics.hpp"
#include "rsc/protocol.hpp"

namespace rsc {

enum class ProfileKind { simulated, uniform, x, y, z };

struct RunConfig {
  std::string preset;

  double gamma_hz = 6.0666e6;  // natural linewidth / 2pi
  double hyperfine_splitting_hz = 3035.732439e6;
  double mass_amu = 84.911789738;
  double wavelength_nm = 780.241;
  std::vector<double> excited_offsets_gamma;  // per F', empty = degenerate

  double omega_perp_hz = 200e3;
  double omega_par_hz = 100e3;
  double temperature_uK = 20;

  double detuning_gamma = -1000;
  std::array<double, 4> rabi_gamma{20, 1, 1, 0};
  bool balance_rabi = true;  // rabi3 from the balance condition at mean_quanta
  std::optional<VibState> mean_quanta;     // rounded thermal occupations when absent
  std::optional<VibState> initial_quanta;  // simulate: mean_quanta when absent

  BasisKind basis = BasisKind::scheme;
  int box_radius = 1;
  GeneratorKind generator = GeneratorKind::full;
  Frame frame = Frame::rotating;
  bool exact_displacement = false;
  bool zeeman_compensation = true;
  bool control_terms = false;

  double rtol = 1e-10;
  double atol = 1e-12;
  int grid_points = 2000;
  double window_factor = 2.5;
  std::optional<double> duration_gamma;

  int vmax = 5;
  int protocol_steps = 10;
  RamanMode raman_mode = RamanMode::ideal;
  PumpingMode pumping_mode = PumpingMode::dephasing;
  ProfileKind c_profile = ProfileKind::simulated;
  bool reoptimize = false;
  double max_tail = 1e-3;
  std::optional<double> pulse_duration_gamma;

  void validate() const;

  TrapParams trap() const;
  ThermalSpec thermal() const;
  LevelScheme levels() const;
  VibState resolved_mean_quanta() const;
  VibState resolved_initial_quanta() const;
  RamanScheme scheme(const VibState& vbar) const;
  RamanScheme scheme() const { return scheme(resolved_mean_quanta()); }
  IntegratorOptions integrator() const;
  ScenarioOptions scenario() const;
  ProtocolConfig protocol() const;
  ProtocolInputs protocol_inputs() const;
};

/// Every field is written; parsing the result gives back the same config.
nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
RunConfig preset(const std::string& name);

}  // namespace rsc
