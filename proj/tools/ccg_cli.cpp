#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccg/ccg.h"

namespace {

enum Exit : int {
  kOk = 0,
  kConfigError = 2,
  kSolverError = 3,
  kCalibrationError = 4,
  kInternalError = 5,
};

int exit_code(int status) {
  switch (status) {
    case CCG_OK:
      return kOk;
    case CCG_ERR_CALIBRATION:
      return kCalibrationError;
    case CCG_ERR_SINGULAR_SYSTEM:
    case CCG_ERR_BOGOLIUBOV:
    case CCG_ERR_OUT_OF_SUPPORT:
    case CCG_ERR_NO_DIP:
    case CCG_ERR_ZERO_NORM:
    case CCG_ERR_SVD:
      return kSolverError;
    case CCG_ERR_INTERNAL:
      return kInternalError;
    default:
      return kConfigError;
  }
}

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::optional<double> grid_span;
  std::optional<std::string> engine;
  int jobs = 1;
  bool fast = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "run config or manifest (JSON)");
  app->add_option("--out", o.out, "output directory")->capture_default_str();
  app->add_option("--seed", o.seed, "ensemble seed");
  app->add_option("--grid-points", o.grid_points, "grid points")
      ->check(CLI::Range(2, 100000));
  app->add_option("--grid-span", o.grid_span, "grid half span, 1/m")
      ->check(CLI::PositiveNumber);
  app->add_option("--engine", o.engine, "full | perturbative")
      ->check(CLI::IsMember({"full", "perturbative"}));
  app->add_flag("--fast", o.fast, "same as --engine perturbative");
  app->add_option("--jobs", o.jobs, "worker threads")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled-cavity Gaussian simulator"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(ccg_version()));

  Options opt;
  const char* commands[][2] = {
      {"scenario", "single scenario: JSAs, JTAs, metrics"},
      {"sweep", "scan one parameter path"},
      {"ensemble", "defect ensemble statistics"},
      {"set-study", "ensemble with stimulated-emission tomography"},
      {"perturb-compare", "first-order vs full kernel"},
      {"calibrate", "fit lambda to the baseline pair probability"}};
  for (const auto& c : commands) add_common(app.add_subcommand(c[0], c[1]), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json request = {{"command", command}, {"out", opt.out}, {"jobs", opt.jobs}};
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    if (!in) {
      std::cerr << "error: cannot open " << opt.config << "\n";
      return kConfigError;
    }
    try {
      request["config"] = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: " << opt.config << ": " << e.what() << "\n";
      return kConfigError;
    }
    request["config_dir"] =
        std::filesystem::absolute(opt.config).parent_path().string();
  }
  if (opt.seed) request["seed"] = *opt.seed;
  if (opt.grid_points) request["grid_points"] = *opt.grid_points;
  if (opt.grid_span) request["grid_span"] = *opt.grid_span;
  if (opt.engine) request["engine"] = *opt.engine;
  if (opt.fast) {
    if (opt.engine && *opt.engine != "perturbative") {
      std::cerr << "error: --fast conflicts with --engine " << *opt.engine << "\n";
      return kConfigError;
    }
    request["engine"] = "perturbative";
  }

  char* manifest = nullptr;
  const int status = ccg_run(request.dump().c_str(), &manifest);
  if (status != CCG_OK) {
    std::cerr << "error [" << status << "]: " << ccg_last_error() << "\n";
    return exit_code(status);
  }
  const auto m = nlohmann::json::parse(manifest);
  ccg_string_free(manifest);

  nlohmann::json brief = m["summary"];
  brief.erase("points");
  brief.erase("comparisons");
  std::cout << command << ": wrote " << (std::filesystem::path(opt.out) / "manifest.json").string()
            << "\n"
            << brief.dump(2) << "\n";
  return kOk;
}
