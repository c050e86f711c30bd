#include "rsc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rsc/errors.hpp"

namespace rsc {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << contents;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

json vib_json(const VibState& v) { return json::array({v.vx, v.vy, v.vz}); }

double max_of(const std::vector<double>& x) { return x.empty() ? 0.0 : *std::max_element(x.begin(), x.end()); }

// First local maximum of P_dest (the first extremum of the swap).
double first_peak(const std::vector<double>& p) {
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (p[i] >= p[i - 1] && p[i] > p[i + 1]) return p[i];
  return max_of(p);
}

}  // namespace

SimulateSummary simulate_run(const RunConfig& config) {
  config.validate();
  const VibState vbar = config.resolved_mean_quanta();
  const VibState v = config.resolved_initial_quanta();
  const RamanScheme scheme = config.scheme(vbar);
  const TrapParams trap = config.trap();
  PulseRun run = simulate_pulse(scheme, v, config.scenario(), config.integrator());

  json s;
  s["mean_quanta"] = vib_json(vbar);
  s["initial_quanta"] = vib_json(v);
  s["lamb_dicke"] = {lamb_dicke(trap, Axis::x), lamb_dicke(trap, Axis::z)};
  s["mean_occupation"] = {mean_occupation(trap, config.thermal(), Axis::x),
                          mean_occupation(trap, config.thermal(), Axis::z)};
  s["rabi_gamma"] = {scheme.beams.reduced_rabi[0], scheme.beams.reduced_rabi[1], scheme.beams.reduced_rabi[2],
                     scheme.beams.reduced_rabi[3]};
  s["carrier_offsets_gamma"] = scheme.beams.carrier_offsets;
  s["dimension"] = run.generator.dimension();
  s["effective_rabi_gamma"] = effective_rabi(scheme, v);
  s["max_P_dest"] = max_of(run.result.p_dest);
  s["first_peak_P_dest"] = first_peak(run.result.p_dest);
  s["max_P_leak"] = max_of(run.result.p_leak);
  s["max_P_imperfection"] = max_of(run.result.p_imperfection);
  s["max_P_other"] = max_of(run.result.p_other);
  s["max_norm_drift"] = run.result.max_norm_drift;
  try {
    const double tau = optimal_tau(run.result, 1e-3);
    const TargetStates ts = target_states(run.result, tau);
    s["optimal_tau"] = tau;
    s["C"] = ts.weight;
    s["overlaps"] = {{"xy", ts.overlap(Axis::x, Axis::y)},
                     {"xz", ts.overlap(Axis::x, Axis::z)},
                     {"yz", ts.overlap(Axis::y, Axis::z)}};
    s["gram_min_eigenvalue"] = ts.gram_min_eigenvalue();
    s["gram_determinant"] = ts.gram_determinant();
  } catch (const NumericalError& e) {
    s["optimal_tau"] = nullptr;
    s["optimal_tau_error"] = e.what();
  }
  if (config.basis != BasisKind::reduced) {
    const LeakageEstimate le = leakage_estimate(scheme, config.frame, run.result);
    s["perturbative_leak_peak"] = le.peak;
  }
  return {s, std::move(run.result)};
}

std::vector<StepReport> protocol_run(const RunConfig& config) {
  config.validate();
  const double tail = truncation_tail(config.vmax, config.trap(), config.thermal(), false);
  if (tail > config.max_tail) {
    throw NumericalError("thermal weight " + std::to_string(tail) + " lies beyond vmax = " + std::to_string(config.vmax));
  }
  return run_protocol(config.protocol(), config.protocol_inputs());
}

void run_simulate(const RunConfig& config, const fs::path& out, bool dump_generator) {
  const SimulateSummary r = simulate_run(config);
  fs::create_directories(out);
  write_atomic(out / "config.json", to_json(config).dump(2) + "\n");
  std::ostringstream csv;
  write_csv(csv, r.result);
  write_atomic(out / "timeseries.csv", csv.str());
  write_atomic(out / "summary.json", r.summary.dump(2) + "\n");
  if (dump_generator) {
    const RamanScheme scheme = config.scheme();
    const PulseRun run = simulate_pulse(scheme, config.resolved_initial_quanta(),
                                        [&] {
                                          ScenarioOptions s = config.scenario();
                                          s.duration = 1e-9;
                                          return s;
                                        }(),
                                        config.integrator());
    write_atomic(out / "generator.json", run.generator.to_json().dump(1) + "\n");
  }
}

void run_protocol(const RunConfig& config, const fs::path& out) {
  const auto reports = protocol_run(config);
  json steps = json::array();
  for (const auto& r : reports) steps.push_back(to_json(r));
  fs::create_directories(out);
  write_atomic(out / "config.json", to_json(config).dump(2) + "\n");
  write_atomic(out / "protocol.json", json{{"steps", steps}}.dump(2) + "\n");
}

std::vector<fs::path> run_sweep(const RunConfig& base, Verb verb, const std::string& key,
                                const std::vector<json>& values, const fs::path& out, unsigned workers) {
  const json echo = to_json(base);
  if (!echo.contains(key) || key == "preset") throw ConfigError("cannot sweep over '" + key + "'");
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  std::vector<RunConfig> configs;
  std::vector<fs::path> dirs;
  for (const auto& v : values) {
    json j = echo;
    j[key] = v;
    configs.push_back(config_from_json(j));
    dirs.push_back(out / (key + "=" + v.dump()));
  }

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(configs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  auto work = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      try {
        if (verb == Verb::simulate) run_simulate(configs[i], dirs[i]);
        else run_protocol(configs[i], dirs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return dirs;
}

}  // namespace rsc
