#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ccg/io.hpp"

namespace ccg {

inline constexpr const char* kVersion = "0.3.1";

/// One CLI invocation. `config` may be a plain run config or a manifest
/// written by an earlier run, in which case its resolved config is reused.
struct RunRequest {
  std::string command;  // empty: taken from a manifest
  json config = json::object();
  std::filesystem::path config_dir = ".";  // base of relative paths
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::optional<double> grid_half_span;
  std::optional<std::string> engine;
  int jobs = 1;
};

/// Runs one of scenario, sweep, ensemble, set-study, perturb-compare,
/// calibrate. Writes manifest.json, metrics.csv and artifacts to out_dir
/// and returns the manifest.
json run_command(const RunRequest& request);

}  // namespace ccg
