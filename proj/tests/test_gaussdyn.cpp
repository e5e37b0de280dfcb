#include "doctest.h"

#include <cmath>

#include "ccg/error.hpp"
#include "ccg/gaussdyn.hpp"
#include "ccg/pipeline.hpp"
#include "ccg/ringscene.hpp"
#include "support.hpp"

using namespace ccg;
using namespace testing;

namespace {

ScenarioParams defected(int points, double lambda) {
  ScenarioParams p = small_scenario(points, lambda);
  p.defects.pump = {std::polar(6e9, 0.3), std::polar(0.12, 1.0), std::polar(0.08, -0.5),
                    std::polar(0.1, 2.0)};
  p.defects.signal = {std::polar(4e9, -1.2), std::polar(0.05, 0.2), std::polar(0.15, 2.5),
                      std::polar(0.17, -0.4)};
  p.defects.idler = {std::polar(8e9, 2.2), std::polar(0.19, -2.0), std::polar(0.02, 0.9),
                     std::polar(0.06, 1.4)};
  return p;
}

// Linear scattering matrix laid out as a diagonal sample-form block.
CMatrix diagonal_block(const DerivedLinear& d, const KGrid& grid, int i, int j) {
  CMatrix out = CMatrix::Zero(grid.n_points, grid.n_points);
  for (int k = 0; k < grid.n_points; ++k) out(k, k) = linear_scattering_matrix(d, grid.at(k))(i, j);
  return out;
}

}  // namespace

TEST_CASE("Bogoliubov identities hold for a defected ring") {
  const PumpedScenario ps = pump_scenario(build_fwm_scenario(defected(41, 0.105326)));
  const SymplecticKernel K = solve_full_kernel(ps.signal_derived, ps.blocks);
  CHECK(K.residual_unitary <= 1e-8);
  CHECK(K.residual_symmetric <= 1e-8);

  const int J = K.num_channels(), n = K.grid.n_points;
  const CMatrix M = K.dense();
  REQUIRE(M.rows() == 2 * J * n);
  CMatrix a(J * n, J * n), b(J * n, J * n);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      a.block(i * n, j * n, n, n) = K.alpha(i, j);
      b.block(i * n, j * n, n, n) = K.beta(i, j);
    }
  }
  CHECK(relative_frobenius(a, M.topLeftCorner(J * n, J * n)) < 1e-15);
  CHECK(relative_frobenius(b, M.topRightCorner(J * n, J * n)) < 1e-15);
  const CMatrix one = CMatrix::Identity(J * n, J * n);
  CHECK(relative_frobenius(a * a.adjoint() - b * b.adjoint(), one) <= 1e-8);
  const CMatrix abt = a * b.transpose();
  CHECK(relative_frobenius(abt, abt.transpose()) <= 1e-8);
  // creation rows are the conjugate mirror
  CHECK(relative_frobenius(M.bottomRightCorner(J * n, J * n), a.conjugate()) < 1e-15);
  CHECK(relative_frobenius(M.bottomLeftCorner(J * n, J * n), b.conjugate()) < 1e-15);
}

TEST_CASE("zero nonlinearity reduces the kernel to the linear scattering map") {
  for (double lambda : {0.0, 1e-7}) {
    CAPTURE(lambda);
    const ScenarioParams p = defected(31, lambda);
    const PumpedScenario ps = pump_scenario(build_fwm_scenario(p));
    const SymplecticKernel K = solve_full_kernel(ps.signal_derived, ps.blocks);
    const int J = K.num_channels();
    for (int i = 0; i < J; ++i) {
      for (int j = 0; j < J; ++j) {
        const CMatrix S = diagonal_block(ps.signal_derived, p.grid, i, j);
        const CMatrix A = K.alpha(i, j);
        CHECK((A - S).norm() <= 1e-10 * std::max(1.0, S.norm()));
        CHECK(K.beta(i, j).norm() <= (lambda == 0.0 ? 0.0 : 1e-5));
      }
    }
  }
}

TEST_CASE("polar factors reproduce the kernel") {
  const PumpedScenario ps = pump_scenario(build_fwm_scenario(defected(31, 0.2)));
  const SymplecticKernel K = solve_full_kernel(ps.signal_derived, ps.blocks);
  const PolarParts P = polar_decompose(K);
  const CMatrix M = K.dense();
  const CMatrix Mh = P.dense_hermitian();
  const CMatrix Mu = P.dense_unitary();
  CHECK(relative_frobenius(Mh * Mu, M) <= 1e-8);
  CHECK(hermiticity_defect(Mh) <= 1e-10);
  CHECK(relative_frobenius(Mu.adjoint() * Mu, CMatrix::Identity(M.rows(), M.cols())) <= 1e-8);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (Mh + Mh.adjoint()));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("polar_factors on random matrices") {
  std::mt19937_64 rng(3);
  for (int n : {1, 4, 9}) {
    const CMatrix m = random_complex(n, n, rng);
    const auto [h, u] = polar_factors(m);
    CHECK(relative_frobenius(h * u, m) < 1e-10);
    CHECK(hermiticity_defect(h) < 1e-12);
    CHECK(relative_frobenius(u * u.adjoint(), CMatrix::Identity(n, n)) < 1e-10);
  }
}

TEST_CASE("constructed polar factors are recovered") {
  std::mt19937_64 rng(17);
  for (int n : {2, 8, 30}) {
    const CMatrix a = random_complex(n, n, rng);
    const CMatrix h0 = a * a.adjoint() + 0.1 * CMatrix::Identity(n, n);
    const CMatrix u0 = random_unitary(n, rng);
    const auto [h, u] = polar_factors(h0 * u0);
    CHECK(relative_frobenius(h, h0) <= 1e-8);
    CHECK(relative_frobenius(u, u0) <= 1e-8);
  }
}

TEST_CASE("beta_h is exchange symmetric") {
  const ScenarioRun run = run_scenario(build_fwm_scenario(defected(31, 0.105326)), Engine::Full);
  for (auto [a, b] : {std::pair{"s1f", "i1f"}, {"s1b", "i1b"}, {"s1f", "i1b"}, {"s1b", "i1f"}}) {
    const JointSpectralAmplitude x = run.jsa(a, b);
    const JointSpectralAmplitude y = run.jsa(b, a);
    CHECK(x.partner == "(" + std::string(b) + "," + a + ")");
    CHECK(relative_frobenius(x.values, y.values.transpose()) <= 1e-10);
  }
}

TEST_CASE("Gamma_Sq scales with the square of the pump") {
  ScenarioParams p = small_scenario(31);
  p.coupling.pump_amplitude = 0.0;
  const PumpedScenario zero = pump_scenario(build_fwm_scenario(p));
  CHECK(zero.blocks.drive_norm() == 0.0);

  p.coupling.pump_amplitude = 1.0;
  const double one = pump_scenario(build_fwm_scenario(p)).blocks.drive_norm();
  p.coupling.pump_amplitude = 2.0;
  const double two = pump_scenario(build_fwm_scenario(p)).blocks.drive_norm();
  CHECK(one > 0.0);
  CHECK(two == doctest::Approx(4.0 * one).epsilon(1e-12));

  p.coupling.pump_amplitude = 1.0;
  p.coupling.lambda *= 3.0;
  const double lam3 = pump_scenario(build_fwm_scenario(p)).blocks.drive_norm();
  CHECK(lam3 == doctest::Approx(3.0 * one).epsilon(1e-12));
}

TEST_CASE("without backscatter only the forward pair is generated") {
  const ScenarioRun run = run_scenario(build_fwm_scenario(small_scenario(31)), Engine::Full);
  const double ff = run.jsa("s1f", "i1f").norm();
  CHECK(ff > 0.0);
  for (auto [a, b] : {std::pair{"s1b", "i1b"}, {"s1f", "i1b"}, {"s1b", "i1f"}}) {
    CHECK(run.jsa(a, b).norm() <= 1e-12 * ff);
  }
}

TEST_CASE("wiring past the convolution table is rejected") {
  const PumpedScenario ps = pump_scenario(build_fwm_scenario(small_scenario(11)));
  std::vector<SqWiring> bad{{99, 0, 1, 7e7, 1.0}};
  CHECK_THROWS_AS(build_gamma_sq(ps.table, {}, bad, 4), Error);
}

TEST_CASE("low-gain advisory") {
  const ScenarioRun weak = run_scenario(build_fwm_scenario(small_scenario(31)), Engine::Full);
  CHECK_FALSE(weak.jsa("s1f", "i1f").advisory.has_value());
  const ScenarioRun strong =
      run_scenario(build_fwm_scenario(small_scenario(31, 0.5)), Engine::Full);
  const JointSpectralAmplitude j = strong.jsa("s1f", "i1f");
  CHECK(j.values.norm() * j.grid.dk() > kLowGainAdvisory);
  CHECK(j.advisory.has_value());
}

TEST_CASE("unknown labels are reported") {
  const ScenarioRun run = run_scenario(build_fwm_scenario(small_scenario(11)), Engine::Full);
  try {
    run.jsa("s1f", "nope");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
}
