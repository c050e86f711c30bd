#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsc/config.hpp"
#include "rsc/errors.hpp"
#include "rsc/runner.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::string out = "out";
  std::optional<int> vmax;
  std::optional<int> steps;
  bool ideal = false;
  bool simulated = false;
  bool dephasing = false;
  bool coherent = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "named preset (see `preset --list`)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--vmax", c.vmax, "vibrational cutoff per axis")->check(CLI::NonNegativeNumber);
  app->add_option("--steps", c.steps, "protocol steps")->check(CLI::NonNegativeNumber);
  auto* ideal = app->add_flag("--ideal", c.ideal, "ideal Raman map");
  auto* sim = app->add_flag("--simulated", c.simulated, "simulated Raman propagator");
  ideal->excludes(sim);
  auto* deph = app->add_flag("--dephasing", c.dephasing, "pumping drops vibrational coherences");
  auto* coh = app->add_flag("--coherent", c.coherent, "pumping keeps vibrational coherences");
  deph->excludes(coh);
}

rsc::RunConfig resolve(const Common& c) {
  rsc::RunConfig cfg;
  if (!c.preset.empty()) cfg = rsc::preset(c.preset);
  if (!c.config_path.empty()) {
    const rsc::RunConfig base = cfg;
    std::ifstream in(c.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw rsc::ConfigError(c.config_path + ": " + e.what());
    }
    cfg = c.preset.empty() ? rsc::load_config(c.config_path) : rsc::config_from_json(j, base);
  }
  if (c.vmax) cfg.vmax = *c.vmax;
  if (c.steps) cfg.protocol_steps = *c.steps;
  if (c.ideal) cfg.raman_mode = rsc::RamanMode::ideal;
  if (c.simulated) cfg.raman_mode = rsc::RamanMode::simulated;
  if (c.dephasing) cfg.pumping_mode = rsc::PumpingMode::dephasing;
  if (c.coherent) cfg.pumping_mode = rsc::PumpingMode::coherent;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-dimensional Raman sideband cooling simulator"};
  app.require_subcommand(1);

  Common simulate_opts, protocol_opts, sweep_opts;
  bool dump_generator = false;
  auto* simulate = app.add_subcommand("simulate", "integrate one Raman pulse");
  add_common(simulate, simulate_opts);
  simulate->add_flag("--dump-generator", dump_generator, "also write the generator as JSON");

  auto* protocol = app.add_subcommand("protocol", "run the Raman / optical pumping cycle");
  add_common(protocol, protocol_opts);

  std::string sweep_key, sweep_verb = "simulate";
  std::vector<std::string> sweep_values;
  unsigned workers = 0;
  auto* sweep = app.add_subcommand("sweep", "repeat a run over values of one configuration key");
  add_common(sweep, sweep_opts);
  sweep->add_option("--key", sweep_key, "configuration key to vary")->required();
  sweep->add_option("--values", sweep_values, "JSON values, one per run")->required()->delimiter(',');
  sweep->add_option("--verb", sweep_verb, "simulate or protocol")->check(CLI::IsMember({"simulate", "protocol"}));
  sweep->add_option("--jobs", workers, "worker threads (0 = all cores)");

  bool list = false;
  auto* presets = app.add_subcommand("preset", "show presets");
  presets->add_flag("--list", list, "list preset names");
  std::string show;
  presets->add_option("name", show, "print the resolved configuration of a preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      rsc::run_simulate(resolve(simulate_opts), simulate_opts.out, dump_generator);
    } else if (*protocol) {
      rsc::run_protocol(resolve(protocol_opts), protocol_opts.out);
    } else if (*sweep) {
      std::vector<nlohmann::json> values;
      for (const auto& v : sweep_values) {
        try {
          values.push_back(nlohmann::json::parse(v));
        } catch (const nlohmann::json::parse_error&) {
          values.emplace_back(v);
        }
      }
      const auto verb = sweep_verb == "protocol" ? rsc::Verb::protocol : rsc::Verb::simulate;
      for (const auto& dir : rsc::run_sweep(resolve(sweep_opts), verb, sweep_key, values, sweep_opts.out, workers))
        std::cout << dir.string() << "\n";
    } else if (*presets) {
      if (!show.empty()) {
        std::cout << rsc::to_json(rsc::preset(show)).dump(2) << "\n";
      } else {
        for (const auto& name : rsc::preset_names()) std::cout << name << "\t" << rsc::preset_description(name) << "\n";
      }
    }
  } catch (const rsc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rsc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
