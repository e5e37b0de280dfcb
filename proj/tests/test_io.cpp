#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ccg/commands.hpp"
#include "ccg/error.hpp"
#include "ccg/io.hpp"
#include "support.hpp"

using namespace ccg;
using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccg_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

}  // namespace

TEST_CASE("complex numbers in three spellings") {
  CHECK(complex_from_json(json(2.5)) == cplx(2.5, 0.0));
  CHECK(complex_from_json(json::array({1.0, -3.0})) == cplx(1.0, -3.0));
  const cplx z = complex_from_json(json{{"mag", 2.0}, {"phase", kPi / 2}});
  CHECK(std::abs(z - cplx(0.0, 2.0)) < 1e-15);
  CHECK(complex_to_json(cplx(1.5, -0.5)) == json::array({1.5, -0.5}));
  CHECK(code_of([] { complex_from_json(json("x")); }) == ErrorCode::Config);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0 / 3.0, -2.718281828459045e-300, 6.02214076e23,
                   std::numeric_limits<double>::min(), std::nextafter(1.0, 2.0)}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("model JSON round trip") {
  ResonanceDefects d;
  d.g = cplx(1e9, -2e9);
  d.c = cplx(0.1, 0.05);
  const CoupledCavityModel m =
      build_resonance_model(WaveguideDispersion{}, RingGeometry{}, itu_wavelength_um(39), d, "p");
  const CoupledCavityModel back = model_from_json(json::parse(model_to_json(m).dump()));
  REQUIRE(back.num_channels() == m.num_channels());
  for (int j = 0; j < m.num_channels(); ++j) {
    CHECK(back.channels[j].label == m.channels[j].label);
    CHECK(back.channels[j].group_velocity == m.channels[j].group_velocity);
    CHECK(back.channels[j].direction == m.channels[j].direction);
    CHECK(back.channels[j].kind == m.channels[j].kind);
  }
  CHECK(back.gamma == m.gamma);
  CHECK(back.g == m.g);
  CHECK(back.C == m.C);

  json minimal = model_to_json(single_cavity(1e8, 7e7, 1e15));
  minimal.erase("g");
  minimal.erase("C");
  const CoupledCavityModel mm = model_from_json(minimal);
  CHECK(mm.g.norm() == 0.0);
  CHECK(mm.C.rows() == 2);
  CHECK(code_of([] { model_from_json(json{{"channels", 3}}); }) == ErrorCode::Config);
}

TEST_CASE("scenario and ensemble JSON round trips") {
  ScenarioParams p = small_scenario(77, 0.2);
  p.defects.idler.delta_bf = cplx(0.01, -0.03);
  p.geometry.self_coupling = 0.97;
  p.detuning = 3e9;
  p.coupling.pump_amplitude = cplx(0.5, 0.5);
  const ScenarioParams q = scenario_from_json(json::parse(scenario_to_json(p).dump()));
  CHECK(q.grid == p.grid);
  CHECK(q.defects.idler.delta_bf == p.defects.idler.delta_bf);
  CHECK(q.geometry.self_coupling == p.geometry.self_coupling);
  CHECK(q.detuning == p.detuning);
  CHECK(q.coupling.lambda == p.coupling.lambda);
  CHECK(q.coupling.pump_amplitude == p.coupling.pump_amplitude);
  CHECK(q.dispersion.coefficients == p.dispersion.coefficients);

  const ScenarioParams partial = scenario_from_json(json{{"grid", {{"points", 11}}}}, p);
  CHECK(partial.grid.n_points == 11);
  CHECK(partial.grid.k_max == doctest::Approx(kStandardHalfSpan));
  CHECK(partial.coupling.lambda == 0.2);

  EnsembleConfig e;
  e.n_samples = 17;
  e.seed = 0xfedcba9876543210ull;
  e.c_max = 0.05;
  e.set_study = true;
  const EnsembleConfig f = ensemble_from_json(json::parse(ensemble_to_json(e).dump()));
  CHECK(f.n_samples == 17);
  CHECK(f.seed == e.seed);
  CHECK(f.c_max == 0.05);
  CHECK(f.set_study);
}

TEST_CASE("parameter paths") {
  ScenarioParams p;
  set_parameter(p, "defects.pump.g", 2e10);
  set_parameter(p, "defects.idler.c", json::array({0.1, 0.2}));
  set_parameter(p, "coupling.lambda", 0.3);
  set_parameter(p, "geometry.self_coupling", 0.99);
  CHECK(p.defects.pump.g == cplx(2e10, 0.0));
  CHECK(p.defects.idler.c == cplx(0.1, 0.2));
  CHECK(p.coupling.lambda == 0.3);
  CHECK(p.geometry.self_coupling == 0.99);
  CHECK(code_of([&] { set_parameter(p, "defects.pump.q", 1.0); }) == ErrorCode::Config);
  CHECK(code_of([&] { set_parameter(p, "grid.points", 1.0); }) == ErrorCode::Config);
}

TEST_CASE("CSV writers") {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row({"1", "2"});
    CHECK(code_of([&] { w.row({"1"}); }) != ErrorCode{0});
  }
  CHECK(slurp(dir / "t.csv").rfind("a,b\n1,2\n", 0) == 0);
  CHECK(code_of([&] { CsvWriter(dir / "missing" / "x.csv", {"a"}); }) == ErrorCode::Io);

  JointSpectralAmplitude j;
  j.grid = KGrid::symmetric(3, 10.0);
  j.values = CMatrix::Zero(3, 3);
  j.values(0, 2) = cplx(1.0, -1.0);
  write_jsa_csv(dir / "jsa.csv", j);
  std::ifstream in(dir / "jsa.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,k_prime,re,im");
  int rows = 0;
  bool found = false;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string k, kp, re, im;
    std::getline(ss, k, ',');
    std::getline(ss, kp, ',');
    std::getline(ss, re, ',');
    std::getline(ss, im, ',');
    if (std::stod(re) == 1.0) {
      found = true;
      CHECK(std::stod(k) == -10.0);
      CHECK(std::stod(kp) == 10.0);
      CHECK(std::stod(im) == -1.0);
    }
  }
  CHECK(rows == 9);
  CHECK(found);

  RVector v(3);
  v << 1.0, 2.0, 3.0;
  write_series_csv(dir / "s.csv", j.grid, v);
  CHECK(slurp(dir / "s.csv").rfind("k,value\n", 0) == 0);
}

TEST_CASE("json files") {
  const fs::path dir = scratch("json");
  write_json_file(dir / "a.json", json{{"x", 1}});
  CHECK(read_json_file(dir / "a.json")["x"] == 1);
  CHECK(code_of([&] { read_json_file(dir / "none.json"); }) == ErrorCode::Io);
  std::ofstream(dir / "bad.json") << "{ nope";
  CHECK(code_of([&] { read_json_file(dir / "bad.json"); }) == ErrorCode::Config);
}

TEST_CASE("run_command writes a manifest that reproduces the run") {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  RunRequest r;
  r.command = "sweep";
  r.config = json::parse(R"({
    "scenario": {"grid": {"points": 21}, "coupling": {"lambda": 0.1}},
    "sweep": {"parameter": "defects.pump.g", "values": [0.0, 2e10], "flag": [1]}
  })");
  r.out_dir = a;
  r.engine = "perturbative";
  const json m = run_command(r);
  CHECK(m["manifest_version"] == kManifestVersion);
  CHECK(m["engine"] == "perturbative");
  CHECK(m["config"]["scenario"]["grid"]["points"] == 21);
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(fs::exists(a / "metrics.csv"));
  CHECK(fs::exists(a / "jsa_sweep_001_ff.csv"));

  RunRequest again;
  again.config = read_json_file(a / "manifest.json");
  again.out_dir = b;
  run_command(again);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "jsa_sweep_001_ff.csv") == slurp(b / "jsa_sweep_001_ff.csv"));
}

TEST_CASE("run_command errors") {
  RunRequest r;
  r.out_dir = scratch("run_err");
  r.command = "frobnicate";
  CHECK(code_of([&] { run_command(r); }) == ErrorCode::Config);
  r.command = "scenario";
  r.config = json{{"scenario", {{"grid", {{"points", 11}}}}}};
  CHECK(code_of([&] { run_command(r); }) == ErrorCode::Calibration);
  r.engine = "warp";
  r.config["scenario"]["coupling"] = {{"lambda", 0.1}};
  CHECK(code_of([&] { run_command(r); }) == ErrorCode::Config);
}
