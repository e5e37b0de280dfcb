#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccg/ccg.h"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path out_root() {
  const char* env = std::getenv("CCG_TEST_OUT");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "ccg_capi";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSingleCavity = R"({
  "channels": [
    {"label": "bus", "carrier_frequency": 1.2e15, "group_velocity": 7e7},
    {"label": "loss", "carrier_frequency": 1.2e15, "group_velocity": 7e7, "kind": "phantom"}
  ],
  "cavities": [{"label": "a", "resonance_frequency": 1.2e15, "group_velocity": 7e7}],
  "gamma": [[8e8, 8e8]]
})";

const char* kScenario = R"({
  "grid": {"points": 31},
  "coupling": {"lambda": 0.105326},
  "defects": {"idler": {"g": 1e10}}
})";

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::string(ccg_version()).size() > 0);
  ccg_model* m = nullptr;
  CHECK(ccg_model_from_json("{ not json", &m) == CCG_ERR_CONFIG);
  CHECK(m == nullptr);
  CHECK(std::string(ccg_last_error()).size() > 0);
  CHECK(ccg_model_from_json(nullptr, &m) == CCG_ERR_INVALID_ARGUMENT);
  CHECK(ccg_model_from_json(kSingleCavity, nullptr) == CCG_ERR_INVALID_ARGUMENT);
  ccg_model_free(nullptr);
  ccg_string_free(nullptr);
}

TEST_CASE("model through the C interface") {
  ccg_model* m = nullptr;
  REQUIRE(ccg_model_from_json(kSingleCavity, &m) == CCG_OK);
  int J = 0, N = 0;
  CHECK(ccg_model_dims(m, &J, &N) == CCG_OK);
  CHECK(J == 2);
  CHECK(N == 1);

  char* issues = nullptr;
  REQUIRE(ccg_model_validate(m, 1, &issues) == CCG_OK);
  CHECK(json::parse(issues).empty());
  ccg_string_free(issues);

  std::vector<double> buf(2 * J * J);
  CHECK(ccg_model_transfer(m, buf.data(), 3) == CCG_ERR_BUFFER_TOO_SMALL);
  REQUIRE(ccg_model_transfer(m, buf.data(), buf.size()) == CCG_OK);
  CHECK(buf[0] == 1.0);
  CHECK(buf[2] == 0.0);

  REQUIRE(ccg_model_scattering(m, 0.0, buf.data(), buf.size()) == CCG_OK);
  CHECK(std::hypot(buf[0], buf[1]) < 1e-12);
  const double k0 = 8e8 * 8e8 / (7e7 * 7e7);
  REQUIRE(ccg_model_scattering(m, k0, buf.data(), buf.size()) == CCG_OK);
  CHECK(buf[0] * buf[0] + buf[1] * buf[1] == doctest::Approx(0.5).epsilon(1e-12));
  ccg_model_free(m);

  json bad = json::parse(kSingleCavity);
  bad["g"] = json::array({json::array({json::array({0.0, 1e9})})});
  CHECK(ccg_model_from_json(bad.dump().c_str(), &m) == CCG_ERR_INVALID_MODEL);
  CHECK(std::string(ccg_last_error()).find("g") != std::string::npos);

  json untuned = json::parse(kSingleCavity);
  untuned["cavities"][0]["group_velocity"] = 7.5e7;
  REQUIRE(ccg_model_from_json(untuned.dump().c_str(), &m) == CCG_OK);
  REQUIRE(ccg_model_validate(m, 0, &issues) == CCG_OK);
  CHECK(json::parse(issues).empty());
  ccg_string_free(issues);
  REQUIRE(ccg_model_validate(m, 1, &issues) == CCG_OK);
  CHECK_FALSE(json::parse(issues).empty());
  ccg_string_free(issues);
  ccg_model_free(m);
}

TEST_CASE("scenario solve, JSAs and metrics") {
  ccg_scenario* s = nullptr;
  REQUIRE(ccg_scenario_from_json(kScenario, &s) == CCG_OK);
  ccg_jsa* j = nullptr;
  CHECK(ccg_scenario_jsa(s, "s1f", "i1f", &j) == CCG_ERR_INVALID_ARGUMENT);
  CHECK(ccg_scenario_solve(s, "warp") == CCG_ERR_CONFIG);
  REQUIRE(ccg_scenario_solve(s, "full") == CCG_OK);
  CHECK(ccg_scenario_jsa(s, "s1f", "zz", &j) == CCG_ERR_UNKNOWN_LABEL);

  REQUIRE(ccg_scenario_jsa(s, "s1f", "i1b", &j) == CCG_OK);
  int n = 0;
  double lo = 0, hi = 0;
  REQUIRE(ccg_jsa_grid(j, &n, &lo, &hi) == CCG_OK);
  CHECK(n == 31);
  CHECK(hi == doctest::Approx(2515.01));
  std::vector<double> values(2 * n * n);
  REQUIRE(ccg_jsa_values(j, values.data(), values.size()) == CCG_OK);
  double purity = 0, pp = 0;
  REQUIRE(ccg_jsa_schmidt(j, &purity, &pp) == CCG_OK);
  CHECK(purity > 0.0);
  CHECK(purity <= 1.0);
  double norm2 = 0;
  for (double v : values) norm2 += v * v;
  const double dk = (hi - lo) / (n - 1);
  CHECK(pp == doctest::Approx(norm2 * dk * dk).epsilon(1e-12));

  ccg_jsa* copy = nullptr;
  REQUIRE(ccg_jsa_from_values(n, lo, hi, values.data(), &copy) == CCG_OK);
  double f = 0;
  REQUIRE(ccg_jsa_fidelity(j, copy, &f) == CCG_OK);
  CHECK(f == doctest::Approx(1.0).epsilon(1e-14));

  char* metrics = nullptr;
  REQUIRE(ccg_scenario_metrics(s, &metrics) == CCG_OK);
  const json m = json::parse(metrics);
  ccg_string_free(metrics);
  CHECK(m.dump().find("fb") != std::string::npos);

  std::vector<double> zeros(2 * n * n, 0.0);
  ccg_jsa* zero = nullptr;
  REQUIRE(ccg_jsa_from_values(n, lo, hi, zeros.data(), &zero) == CCG_OK);
  CHECK(ccg_jsa_schmidt(zero, &purity, &pp) == CCG_ERR_ZERO_NORM);
  CHECK(ccg_jsa_from_values(1, 0.0, 1.0, zeros.data(), &zero) != CCG_OK);

  ccg_jsa_free(zero);
  ccg_jsa_free(copy);
  ccg_jsa_free(j);
  ccg_scenario_free(s);
}

TEST_CASE("ccg_run and manifest reruns") {
  const fs::path a = out_root() / "a", b = out_root() / "b";
  fs::remove_all(a);
  fs::remove_all(b);
  json req = {{"command", "scenario"},
              {"config", {{"scenario", json::parse(kScenario)}}},
              {"out", a.string()},
              {"engine", "perturbative"}};
  char* manifest = nullptr;
  REQUIRE(ccg_run(req.dump().c_str(), &manifest) == CCG_OK);
  const json m = json::parse(manifest);
  ccg_string_free(manifest);
  CHECK(m["command"] == "scenario");
  CHECK(m["files"].contains("metrics.csv"));

  json again = {{"config", json::parse(slurp(a / "manifest.json"))}, {"out", b.string()}};
  REQUIRE(ccg_run(again.dump().c_str(), &manifest) == CCG_OK);
  ccg_string_free(manifest);
  for (const auto& [name, cols] : m["files"].items()) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }

  json unknown = {{"command", "nope"}, {"out", a.string()}};
  CHECK(ccg_run(unknown.dump().c_str(), &manifest) == CCG_ERR_CONFIG);
  json uncalibrated = {{"command", "scenario"},
                       {"config", {{"scenario", {{"grid", {{"points", 11}}}}}}},
                       {"out", a.string()}};
  CHECK(ccg_run(uncalibrated.dump().c_str(), &manifest) == CCG_ERR_CALIBRATION);
  CHECK(std::string(ccg_last_error()).find("calibration") != std::string::npos);
}
