#include "rsc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "rsc/errors.hpp"

namespace rsc {

namespace {

using nlohmann::json;

template <class E>
using Names = std::vector<std::pair<E, const char*>>;

const Names<BasisKind> kBasisNames{{BasisKind::scheme, "scheme"}, {BasisKind::reduced, "reduced"}, {BasisKind::box, "box"}};
const Names<GeneratorKind> kGeneratorNames{{GeneratorKind::full, "full"}, {GeneratorKind::reduced, "reduced"}};
const Names<Frame> kFrameNames{{Frame::rotating, "rotating"}, {Frame::lab, "lab"}};
const Names<RamanMode> kRamanNames{{RamanMode::ideal, "ideal"}, {RamanMode::simulated, "simulated"}};
const Names<PumpingMode> kPumpingNames{{PumpingMode::dephasing, "dephasing"}, {PumpingMode::coherent, "coherent"}};
const Names<ProfileKind> kProfileNames{{ProfileKind::simulated, "simulated"},
                                       {ProfileKind::uniform, "uniform"},
                                       {ProfileKind::x, "x"},
                                       {ProfileKind::y, "y"},
                                       {ProfileKind::z, "z"}};

template <class E>
std::string name_of(const Names<E>& names, E e) {
  for (const auto& [v, n] : names)
    if (v == e) return n;
  throw std::logic_error("unnamed enum value");
}

template <class E>
E parse_name(const Names<E>& names, const json& j, const std::string& key) {
  const auto s = j.get<std::string>();
  for (const auto& [v, n] : names)
    if (s == n) return v;
  std::string options;
  for (const auto& [v, n] : names) options += std::string(options.empty() ? "" : ", ") + n;
  throw ConfigError(key + ": unknown value '" + s + "' (expected one of " + options + ")");
}

json vib_json(const VibState& v) { return json::array({v.vx, v.vy, v.vz}); }

VibState parse_vib(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(key + " must be an array of three integers");
  VibState v{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
  if (v.vx < 0 || v.vy < 0 || v.vz < 0) throw ConfigError(key + " must be non-negative");
  return v;
}

template <class T>
json opt_json(const std::optional<T>& o) {
  return o ? json(*o) : json(nullptr);
}

void require_positive(double x, const char* key) {
  if (!(x > 0) || !std::isfinite(x)) throw ConfigError(std::string(key) + " must be positive");
}

}  // namespace

void RunConfig::validate() const {
  require_positive(gamma_hz, "gamma_hz");
  require_positive(hyperfine_splitting_hz, "hyperfine_splitting_hz");
  require_positive(mass_amu, "mass_amu");
  require_positive(wavelength_nm, "wavelength_nm");
  require_positive(omega_perp_hz, "omega_perp_hz");
  require_positive(omega_par_hz, "omega_par_hz");
  require_positive(temperature_uK, "temperature_uK");
  require_positive(rtol, "rtol");
  require_positive(atol, "atol");
  require_positive(window_factor, "window_factor");
  require_positive(max_tail, "max_tail");
  if (!std::isfinite(detuning_gamma) || detuning_gamma == 0) throw ConfigError("detuning_gamma must be finite and nonzero");
  if (!preset.empty() && detuning_gamma >= 0) throw ConfigError("presets are red detuned: detuning_gamma must be < 0");
  if (!excited_offsets_gamma.empty() && excited_offsets_gamma.size() != 4) {
    throw ConfigError("excited_offsets_gamma needs one entry per F' = 1..4");
  }
  for (std::size_t j = 0; j < 4; ++j) {
    if (rabi_gamma[j] < 0 || !std::isfinite(rabi_gamma[j])) throw ConfigError("rabi" + std::to_string(j) + "_gamma must be >= 0");
  }
  if (!(rabi_gamma[0] > 0)) throw ConfigError("rabi0_gamma must be positive");
  if (grid_points < 3) throw ConfigError("grid_points must be >= 3");
  if (box_radius < 0) throw ConfigError("box_radius must be >= 0");
  if (duration_gamma && !(*duration_gamma > 0)) throw ConfigError("duration_gamma must be positive");
  if (pulse_duration_gamma && *pulse_duration_gamma < 0) throw ConfigError("pulse_duration_gamma must be >= 0");
  if (vmax < 0) throw ConfigError("vmax must be >= 0");
  if (protocol_steps < 0) throw ConfigError("protocol_steps must be >= 0");
  if (mean_quanta && mean_quanta->total() == 0) throw ConfigError("mean_quanta must not be all zero");
}

TrapParams RunConfig::trap() const {
  return TrapParams::from_si(omega_perp_hz, omega_par_hz, mass_amu * si::amu, wavelength_nm * 1e-9, gamma_hz);
}

ThermalSpec RunConfig::thermal() const { return ThermalSpec::from_temperature_uK(temperature_uK, trap()); }

LevelScheme RunConfig::levels() const {
  return LevelScheme::rb85_d2(detuning_gamma, hyperfine_splitting_hz / gamma_hz, excited_offsets_gamma);
}

VibState RunConfig::resolved_mean_quanta() const {
  if (mean_quanta) return *mean_quanta;
  const TrapParams t = trap();
  const ThermalSpec th = thermal();
  VibState v;
  for (Axis a : kAxes) v[a] = std::max(1, static_cast<int>(std::lround(mean_occupation(t, th, a))));
  return v;
}

VibState RunConfig::resolved_initial_quanta() const { return initial_quanta ? *initial_quanta : resolved_mean_quanta(); }

RamanScheme RunConfig::scheme(const VibState& vbar) const {
  std::array<double, kBeams> rabi = rabi_gamma;
  if (balance_rabi) {
    const auto [o2, o3] = balanced_rabi(trap(), vbar, rabi[1]);
    rabi[2] = o2;
    rabi[3] = o3;
  }
  SchemeOptions opts;
  opts.zeeman_compensation = zeeman_compensation;
  opts.control_terms = control_terms;
  return prepare_scheme(levels(), trap(), rabi, opts);
}

IntegratorOptions RunConfig::integrator() const {
  IntegratorOptions o;
  o.rtol = rtol;
  o.atol = atol;
  o.grid_points = grid_points;
  return o;
}

ScenarioOptions RunConfig::scenario() const {
  ScenarioOptions s;
  s.basis = basis;
  s.box_radius = box_radius;
  s.generator.kind = generator;
  s.generator.frame = frame;
  s.generator.displacement = exact_displacement ? DisplacementMode::exact : DisplacementMode::linearized;
  s.window_factor = window_factor;
  s.duration = duration_gamma;
  return s;
}

ProtocolConfig RunConfig::protocol() const {
  ProtocolConfig p;
  p.n_steps = protocol_steps;
  p.vmax = vmax;
  p.raman = raman_mode;
  p.pumping = pumping_mode;
  p.max_tail = max_tail;
  p.pulse_duration = pulse_duration_gamma;
  p.reoptimize = reoptimize;
  return p;
}

ProtocolInputs RunConfig::protocol_inputs() const {
  ProtocolInputs in;
  in.trap = trap();
  in.thermal = thermal();
  in.levels = levels();
  in.mean_quanta = resolved_mean_quanta();
  in.integrator = integrator();
  const RunConfig self = *this;
  in.scheme_for = [self](const VibState& v) { return self.scheme(v); };
  switch (c_profile) {
    case ProfileKind::uniform: in.profile = uniform_profile(); break;
    case ProfileKind::x: in.profile = single_axis_profile(Axis::x); break;
    case ProfileKind::y: in.profile = single_axis_profile(Axis::y); break;
    case ProfileKind::z: in.profile = single_axis_profile(Axis::z); break;
    case ProfileKind::simulated:
      if (raman_mode == RamanMode::ideal) in.profile = simulated_profile(scheme(), vmax, integrator());
      break;
  }
  return in;
}

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["gamma_hz"] = c.gamma_hz;
  j["hyperfine_splitting_hz"] = c.hyperfine_splitting_hz;
  j["mass_amu"] = c.mass_amu;
  j["wavelength_nm"] = c.wavelength_nm;
  j["excited_offsets_gamma"] = c.excited_offsets_gamma;
  j["omega_perp_hz"] = c.omega_perp_hz;
  j["omega_par_hz"] = c.omega_par_hz;
  j["temperature_uK"] = c.temperature_uK;
  j["detuning_gamma"] = c.detuning_gamma;
  for (std::size_t k = 0; k < 4; ++k) j["rabi" + std::to_string(k) + "_gamma"] = c.rabi_gamma[k];
  j["balance_rabi"] = c.balance_rabi;
  j["mean_quanta"] = c.mean_quanta ? vib_json(*c.mean_quanta) : json(nullptr);
  j["initial_quanta"] = c.initial_quanta ? vib_json(*c.initial_quanta) : json(nullptr);
  j["basis"] = name_of(kBasisNames, c.basis);
  j["box_radius"] = c.box_radius;
  j["generator"] = name_of(kGeneratorNames, c.generator);
  j["frame"] = name_of(kFrameNames, c.frame);
  j["exact_displacement"] = c.exact_displacement;
  j["zeeman_compensation"] = c.zeeman_compensation;
  j["control_terms"] = c.control_terms;
  j["rtol"] = c.rtol;
  j["atol"] = c.atol;
  j["grid_points"] = c.grid_points;
  j["window_factor"] = c.window_factor;
  j["duration_gamma"] = opt_json(c.duration_gamma);
  j["vmax"] = c.vmax;
  j["protocol_steps"] = c.protocol_steps;
  j["raman_mode"] = name_of(kRamanNames, c.raman_mode);
  j["pumping_mode"] = name_of(kPumpingNames, c.pumping_mode);
  j["c_profile"] = name_of(kProfileNames, c.c_profile);
  j["reoptimize"] = c.reoptimize;
  j["max_tail"] = c.max_tail;
  j["pulse_duration_gamma"] = opt_json(c.pulse_duration_gamma);
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  using Setter = std::function<void(const json&, const std::string&)>;
  auto number = [](double& field) -> Setter { return [&field](const json& v, const std::string&) { field = v.get<double>(); }; };
  auto integer = [](int& field) -> Setter { return [&field](const json& v, const std::string&) { field = v.get<int>(); }; };
  auto flag = [](bool& field) -> Setter { return [&field](const json& v, const std::string&) { field = v.get<bool>(); }; };
  auto maybe = [](std::optional<double>& field) -> Setter {
    return [&field](const json& v, const std::string&) {
      if (v.is_null()) field.reset();
      else field = v.get<double>();
    };
  };
  auto maybe_vib = [](std::optional<VibState>& field) -> Setter {
    return [&field](const json& v, const std::string& key) {
      if (v.is_null()) field.reset();
      else field = parse_vib(v, key);
    };
  };
  auto named = [](auto& field, const auto& names) -> Setter {
    return [&field, &names](const json& v, const std::string& key) { field = parse_name(names, v, key); };
  };

  const std::map<std::string, Setter> setters{
      {"preset", [&](const json& v, const std::string&) { c.preset = v.get<std::string>(); }},
      {"gamma_hz", number(c.gamma_hz)},
      {"hyperfine_splitting_hz", number(c.hyperfine_splitting_hz)},
      {"mass_amu", number(c.mass_amu)},
      {"wavelength_nm", number(c.wavelength_nm)},
      {"excited_offsets_gamma",
       [&](const json& v, const std::string&) { c.excited_offsets_gamma = v.get<std::vector<double>>(); }},
      {"omega_perp_hz", number(c.omega_perp_hz)},
      {"omega_par_hz", number(c.omega_par_hz)},
      {"temperature_uK", number(c.temperature_uK)},
      {"detuning_gamma", number(c.detuning_gamma)},
      {"rabi0_gamma", number(c.rabi_gamma[0])},
      {"rabi1_gamma", number(c.rabi_gamma[1])},
      {"rabi2_gamma", number(c.rabi_gamma[2])},
      {"rabi3_gamma", number(c.rabi_gamma[3])},
      {"balance_rabi", flag(c.balance_rabi)},
      {"mean_quanta", maybe_vib(c.mean_quanta)},
      {"initial_quanta", maybe_vib(c.initial_quanta)},
      {"basis", named(c.basis, kBasisNames)},
      {"box_radius", integer(c.box_radius)},
      {"generator", named(c.generator, kGeneratorNames)},
      {"frame", named(c.frame, kFrameNames)},
      {"exact_displacement", flag(c.exact_displacement)},
      {"zeeman_compensation", flag(c.zeeman_compensation)},
      {"control_terms", flag(c.control_terms)},
      {"rtol", number(c.rtol)},
      {"atol", number(c.atol)},
      {"grid_points", integer(c.grid_points)},
      {"window_factor", number(c.window_factor)},
      {"duration_gamma", maybe(c.duration_gamma)},
      {"vmax", integer(c.vmax)},
      {"protocol_steps", integer(c.protocol_steps)},
      {"raman_mode", named(c.raman_mode, kRamanNames)},
      {"pumping_mode", named(c.pumping_mode, kPumpingNames)},
      {"c_profile", named(c.c_profile, kProfileNames)},
      {"reoptimize", flag(c.reoptimize)},
      {"max_tail", number(c.max_tail)},
      {"pulse_duration_gamma", maybe(c.pulse_duration_gamma)},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown configuration key '" + key + "'");
    try {
      it->second(value, key);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig base;
  if (j.is_object() && j.contains("preset") && j["preset"].is_string() && !j["preset"].get<std::string>().empty()) {
    base = preset(j["preset"].get<std::string>());
  }
  return config_from_json(j, base);
}

std::vector<std::string> preset_names() { return {"fig5", "fig6", "appendixA"}; }

std::string preset_description(const std::string& name) {
  if (name == "fig5") return "Raman pulse at detuning -1000 gamma, 20 uK, mean quanta (2,2,4)";
  if (name == "fig6") return "Raman pulse at detuning -5000 gamma, 20 uK, mean quanta (2,2,4)";
  if (name == "appendixA") return "ideal-map protocol ledger, 3 uK, vmax 5, uniform C profile";
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.mean_quanta = VibState{2, 2, 4};
  if (name == "fig5") {
    c.detuning_gamma = -1000;
  } else if (name == "fig6") {
    c.detuning_gamma = -5000;
  } else if (name == "appendixA") {
    c.temperature_uK = 3;
    c.vmax = 5;
    c.protocol_steps = 15;
    c.raman_mode = RamanMode::ideal;
    c.c_profile = ProfileKind::uniform;
    c.mean_quanta.reset();
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace rsc
