#pragma once

// Execution of configured runs and their on-disk outputs.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsc/config.hpp"

namespace rsc {

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

struct SimulateSummary {
  nlohmann::json summary;
  SimulationResult result;
};

SimulateSummary simulate_run(const RunConfig& config);
std::vector<StepReport> protocol_run(const RunConfig& config);

/// config.json, timeseries.csv, summary.json and optionally generator.json.
void run_simulate(const RunConfig& config, const std::filesystem::path& out, bool dump_generator = false);
/// config.json and protocol.json.
void run_protocol(const RunConfig& config, const std::filesystem::path& out);

enum class Verb { simulate, protocol };

/// One run per value of `key`, each in out/<key>=<value>/. Runs execute on
/// up to `workers` threads (hardware concurrency when 0).
std::vector<std::filesystem::path> run_sweep(const RunConfig& base, Verb verb, const std::string& key,
                                             const std::vector<nlohmann::json>& values,
                                             const std::filesystem::path& out, unsigned workers = 0);

}  // namespace rsc
