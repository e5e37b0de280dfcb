#include "doctest.h"

#include <cmath>

#include "ccg/error.hpp"
#include "ccg/pipeline.hpp"
#include "support.hpp"

using namespace ccg;
using namespace testing;

TEST_CASE("engine names") {
  CHECK(parse_engine("full") == Engine::Full);
  CHECK(parse_engine("perturbative") == Engine::Perturbative);
  CHECK(std::string(engine_name(Engine::Perturbative)) == "perturbative");
  CHECK_THROWS_AS(parse_engine("exact"), Error);
}

TEST_CASE("calibration hits the target") {
  const ScenarioParams p = small_scenario(41, 0.0);
  for (Engine e : {Engine::Perturbative, Engine::Full}) {
    const CalibrationResult r = calibrate_lambda(p, e, 0.01265, 1e-6);
    CHECK(std::abs(r.pair_probability - 0.01265) <= 1e-6);
    CHECK(std::abs(baseline_pair_probability(p, e, r.lambda) - 0.01265) <= 1e-6);
    CHECK(r.evaluations < 20);
  }
}

TEST_CASE("zero target gives zero coupling") {
  const CalibrationResult r = calibrate_lambda(small_scenario(21, 0.0), Engine::Full, 0.0);
  CHECK(r.lambda == 0.0);
  CHECK(r.evaluations == 0);
}

TEST_CASE("doubling the target scales lambda by sqrt 2") {
  const ScenarioParams p = small_scenario(41, 0.0);
  const double a = calibrate_lambda(p, Engine::Full, 0.005, 1e-7).lambda;
  const double b = calibrate_lambda(p, Engine::Full, 0.010, 1e-7).lambda;
  CHECK(b / a == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("calibration without pairs fails cleanly") {
  ScenarioParams p = small_scenario(21, 0.0);
  p.coupling.pump_amplitude = 0.0;
  try {
    calibrate_lambda(p, Engine::Perturbative);
    FAIL("expected a calibration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Calibration);
  }
  CHECK_THROWS_AS(calibrate_lambda(small_scenario(21, 0.0), Engine::Full, 0.01, 0.0), Error);
}

TEST_CASE("purities are converged in the grid density") {
  ScenarioParams p = small_scenario(201);
  p.defects.pump.g = 1.6e10;
  p.defects.idler.g = 3e9;
  const auto purities = [&](int points, Engine e) {
    ScenarioParams q = p;
    q.grid = KGrid::symmetric(points, kStandardHalfSpan);
    const ScenarioRun run = run_scenario(build_fwm_scenario(q), e);
    std::vector<double> out;
    for (auto [a, b] : {std::pair{"s1f", "i1f"}, {"s1b", "i1b"}, {"s1f", "i1b"}}) {
      out.push_back(schmidt(run.jsa(a, b)).purity);
    }
    return out;
  };
  const auto p201 = purities(201, Engine::Perturbative);
  const auto p401 = purities(401, Engine::Perturbative);
  for (std::size_t i = 0; i < p201.size(); ++i) CHECK(std::abs(p201[i] - p401[i]) < 0.003);
  const auto f101 = purities(101, Engine::Full);
  const auto f201 = purities(201, Engine::Full);
  for (std::size_t i = 0; i < f101.size(); ++i) CHECK(std::abs(f101[i] - f201[i]) < 0.01);
}
