#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"
#include "fraclab/report.hpp"

namespace fraclab::harness {

using Json = nlohmann::ordered_json;

struct RunOptions {
  std::filesystem::path out_dir = "results";
  unsigned jobs = 1;
  bool dump_matrix = false;
  std::ostream* log = nullptr;  // human-readable summary lines
};

/// JSON record of one subcommand; `passed` is false if any enabled verifier failed.
struct RunResult {
  Json record;
  bool passed = true;
};

RunResult run_eig(const RunConfig& cfg, const RunOptions& opts);
RunResult run_solve(const RunConfig& cfg, const RunOptions& opts);
RunResult run_sweep(const RunConfig& cfg, const RunOptions& opts);
RunResult run_potential(const RunConfig& cfg, const RunOptions& opts);
RunResult run_mc(const RunConfig& cfg, const RunOptions& opts);
RunResult run_all(const RunConfig& cfg, const RunOptions& opts);

/// Dispatches on the subcommand name; throws ConfigError on an unknown one.
RunResult run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opts);

/// manifest.json: config hash, code version, seed, command.
Json manifest(const std::string& command, const RunConfig& cfg, bool passed);

Json to_json(const Report& r);

std::string version();

}  // namespace fraclab::harness
