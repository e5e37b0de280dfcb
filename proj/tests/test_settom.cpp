#include "doctest.h"

#include <cmath>

#include "ccg/error.hpp"
#include "ccg/montecarlo.hpp"
#include "ccg/settom.hpp"
#include "support.hpp"

using namespace ccg;
using namespace testing;

TEST_CASE("dataset is the raw beta sub-blocks of the kernel") {
  ScenarioParams p = small_scenario(31);
  p.defects.signal.g = 4e9;
  const ScenarioRun run = run_scenario(build_fwm_scenario(p), Engine::Full);
  const SETDataset d = simulate_set(*run.kernel, "s1f", "i1f");
  const int s = run.kernel->channel_index("s1f"), i = run.kernel->channel_index("i1f");
  CHECK(d.beta12 == run.kernel->beta(s, i));
  CHECK(d.beta21 == run.kernel->beta(i, s));
  CHECK_THROWS_AS(simulate_set(*run.kernel, "s1f", "x"), Error);

  const SETDataset f = simulate_set_first_order(run.filter, run.pumped.blocks, "s1f", "i1f");
  CHECK(relative_frobenius(f.beta12, perturbative_beta(run.filter, run.pumped.blocks, s, i)) == 0.0);
  // first order agrees with the full raw beta at this gain
  CHECK(relative_frobenius(f.beta12, d.beta12) < 0.05);
}

TEST_CASE("exact reconstruction without backscatter") {
  for (Engine e : {Engine::Full, Engine::Perturbative}) {
    const ScenarioRun run = run_scenario(build_fwm_scenario(small_scenario(41)), e);
    const SetComparison c = set_study(run);
    CAPTURE(engine_name(e));
    CHECK(c.fidelity >= 1.0 - 1e-8);
    CHECK(std::abs(c.purity_gap) <= 1e-8);
    CHECK_FALSE(c.rank_deficient);
  }
}

TEST_CASE("backscatter degrades the inference") {
  ScenarioParams p = small_scenario(41);
  p.defects.signal = {std::polar(9e9, 0.5), std::polar(0.18, 1.0), std::polar(0.15, -2.0),
                      std::polar(0.2, 0.4)};
  p.defects.idler = {std::polar(7e9, -1.5), std::polar(0.1, 2.0), std::polar(0.19, 0.1),
                     std::polar(0.17, -1.1)};
  const ScenarioRun run = run_scenario(build_fwm_scenario(p), Engine::Full);
  const SetComparison c = set_study(run);
  CHECK(c.fidelity < 1.0 - 1e-6);
  CHECK(c.fidelity > 0.5);
  CHECK(c.true_purity == doctest::Approx(schmidt(run.jsa("s1f", "i1f")).purity));
}

TEST_CASE("zero nonlinearity leaves nothing to reconstruct") {
  const ScenarioRun run = run_scenario(build_fwm_scenario(small_scenario(21, 0.0)), Engine::Full);
  const SETDataset d = simulate_set(*run.kernel, "s1f", "i1f");
  try {
    reconstruct_standard(d);
    FAIL("expected ZeroNorm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNorm);
  }
}

TEST_CASE("global seed phase does not change the reconstruction") {
  ScenarioParams p = small_scenario(31);
  p.defects.idler.g = std::polar(6e9, 0.7);
  p.defects.signal.c = std::polar(0.1, -0.3);
  const ScenarioRun run = run_scenario(build_fwm_scenario(p), Engine::Full);
  const SETDataset d = simulate_set(*run.kernel, "s1f", "i1f");
  const SetReconstruction ref = reconstruct_standard(d);
  for (double phi : {0.3, 1.7, -2.9}) {
    SETDataset r = d;
    r.beta12 *= std::polar(1.0, phi);
    r.beta21 *= std::polar(1.0, phi);
    const SetReconstruction rec = reconstruct_standard(r);
    CHECK(relative_frobenius(rec.inferred.values, ref.inferred.values) <= 1e-8);
    CHECK(relative_frobenius(rec.singular_values.cast<cplx>(), ref.singular_values.cast<cplx>()) <=
          1e-12);
  }
}

TEST_CASE("column phase convention") {
  CMatrix u(4, 2), v = CMatrix::Identity(2, 2);
  u << cplx(0.1, 0.0), cplx(0.0, 0.5), cplx(0.0, -0.9), cplx(0.5, 0.0), cplx(0.3, 0.3),
      cplx(0.0, 0.5), cplx(0.0, 0.0), cplx(-0.2, 0.0);
  CMatrix u1 = u, v1 = v;
  fix_column_phases(u1, v1);
  CHECK(u1(1, 0).real() == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(std::abs(u1(1, 0).imag()) < 1e-15);
  // tie between rows 0 and 2 in the second column
  CHECK(std::abs(u1(0, 1) - cplx(0.5, 0.0)) < 1e-15);
  CMatrix u2 = u, v2 = v;
  fix_column_phases(u2, v2, true);
  CHECK(std::abs(u2(2, 1) - cplx(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(v1(1, 1) - cplx(0.0, -1.0)) < 1e-15);
  // columns keep their norms
  CHECK(u1.col(0).norm() == doctest::Approx(u.col(0).norm()));
}
