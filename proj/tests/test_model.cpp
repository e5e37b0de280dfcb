#include "doctest.h"

#include <cmath>

#include "ccg/error.hpp"
#include "ccg/model.hpp"
#include "support.hpp"

using namespace ccg;
using namespace testing;

namespace {

// exp(-2i atan(X/2)) through the eigenbasis of the Hermitian X = V^-1 C.
CMatrix transfer_oracle(const CMatrix& X) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(X);
  CVector phase(X.rows());
  for (int i = 0; i < X.rows(); ++i) {
    phase[i] = std::exp(-2.0 * I * std::atan(0.5 * es.eigenvalues()[i]));
  }
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

// Channels split into velocity groups; C only couples within a group.
CoupledCavityModel grouped_model(int J, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> vel(5e7, 1e8);
  std::uniform_int_distribution<int> group(0, 2);
  const double vg[3] = {vel(rng), vel(rng), vel(rng)};
  CoupledCavityModel m;
  std::vector<int> gid(J);
  for (int j = 0; j < J; ++j) {
    gid[j] = group(rng);
    m.channels.push_back({"c" + std::to_string(j), 1e15, vg[gid[j]],
                          Direction::Forward, ChannelKind::Bus});
  }
  m.cavities = {{"a", 1e15, vg[0]}};
  m.gamma = CMatrix::Zero(1, J);
  m.g = CMatrix::Zero(1, 1);
  CMatrix C = random_hermitian(J, rng);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      if (gid[i] != gid[j]) C(i, j) = 0.0;
    }
  }
  m.C = C * 1e8;
  return m;
}

}  // namespace

TEST_CASE("transfer matrix is unitary and matches the matrix-function form") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int J = 2 + trial % 5;
    const CoupledCavityModel m = grouped_model(J, rng);
    const DerivedLinear d = derive_linear(m);
    const CMatrix one = CMatrix::Identity(J, J);
    CHECK(relative_frobenius(d.T.adjoint() * d.T, one) < 1e-12);
    const RVector inv_v = m.channel_velocities().cwiseInverse();
    const CMatrix X = inv_v.asDiagonal() * m.C;
    CHECK(relative_frobenius(d.T, transfer_oracle(X)) < 1e-10);
  }
}

TEST_CASE("zero channel coupling gives identity transfer") {
  const CoupledCavityModel m = single_cavity(kPumpRate, kPumpVelocity, kPumpOmega);
  const DerivedLinear d = derive_linear(m);
  CHECK(relative_frobenius(d.T, CMatrix::Identity(2, 2)) < 1e-15);
  CHECK(relative_frobenius(d.gamma_bar, m.gamma) < 1e-15);
}

TEST_CASE("single cavity with two equal channels: Gamma_bar = rate^2 / v") {
  const CoupledCavityModel m = single_cavity(kPumpRate, kPumpVelocity, kPumpOmega);
  const DerivedLinear d = derive_linear(m);
  const double expected = kPumpRate * kPumpRate / kPumpVelocity;
  CHECK(std::abs(d.Gamma_bar(0, 0) - cplx(expected, 0.0)) < 1e-12 * expected);
}

TEST_CASE("Gamma_bar is dissipative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    CoupledCavityModel m;
    const int N = 3, J = 4;
    for (int j = 0; j < J; ++j) {
      m.channels.push_back({"c" + std::to_string(j), 1e15, 7e7});
    }
    for (int n = 0; n < N; ++n) m.cavities.push_back({"a" + std::to_string(n), 1e15, 7e7});
    m.gamma = random_complex(N, J, rng) * 1e8;
    m.g = random_hermitian(N, rng) * 1e10;
    m.C = random_hermitian(J, rng) * 1e7;
    const DerivedLinear d = derive_linear(m);
    Eigen::ComplexEigenSolver<CMatrix> es(d.Gamma_bar);
    const double scale = d.Gamma_bar.norm();
    for (int i = 0; i < N; ++i) CHECK(es.eigenvalues()[i].real() >= -1e-12 * scale);
  }
}

TEST_CASE("validation names each broken rule") {
  CoupledCavityModel m = single_cavity(kPumpRate, kPumpVelocity, kPumpOmega);
  CHECK(validate_model(m).empty());
  CHECK(validate_model(m, true).empty());

  SUBCASE("non-Hermitian g") {
    CoupledCavityModel two;
    two.channels = m.channels;
    two.cavities = {{"a", kPumpOmega, kPumpVelocity}, {"b", kPumpOmega, kPumpVelocity}};
    two.gamma = CMatrix::Zero(2, 2);
    two.g = CMatrix::Zero(2, 2);
    two.g(0, 1) = cplx(1e9, 0.0);
    two.g(1, 0) = cplx(2e9, 0.0);
    two.C = CMatrix::Zero(2, 2);
    const auto issues = validate_model(two);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("g") != std::string::npos);
    CHECK_THROWS_AS(derive_linear(two), Error);
  }
  SUBCASE("C between mismatched velocities") {
    m.channels[1].group_velocity = 2.0 * kPumpVelocity;
    m.C(0, 1) = m.C(1, 0) = cplx(1e6, 0.0);
    const auto issues = validate_model(m);
    REQUIRE_FALSE(issues.empty());
    for (const auto& s : issues) CHECK(s.find("velocit") != std::string::npos);
  }
  SUBCASE("tuned rules") {
    m.cavities[0].group_velocity = 1.1 * kPumpVelocity;
    CHECK(validate_model(m).empty());
    CHECK_FALSE(validate_model(m, true).empty());
  }
  SUBCASE("shape mismatch") {
    m.gamma = CMatrix::Zero(2, 2);
    CHECK_FALSE(validate_model(m).empty());
  }
}

TEST_CASE("non-Hermitian C is rejected") {
  CoupledCavityModel m = single_cavity(kPumpRate, kPumpVelocity, kPumpOmega);
  m.C(0, 0) = cplx(0.0, 2.0 * kPumpVelocity);
  try {
    derive_linear(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidModel);
  }
}

TEST_CASE("combine_models is block diagonal and rejects label clashes") {
  const CoupledCavityModel a = single_cavity(1e8, 7e7, 1e15);
  CoupledCavityModel b = single_cavity(2e8, 7e7, 1e15);
  CHECK_THROWS_AS(combine_models(a, b), Error);
  b.channels[0].label = "bus2";
  b.channels[1].label = "loss2";
  b.cavities[0].label = "b";
  const CoupledCavityModel c = combine_models(a, b);
  CHECK(c.num_channels() == 4);
  CHECK(c.num_cavities() == 2);
  CHECK(c.gamma(0, 2) == cplx(0.0, 0.0));
  CHECK(c.gamma(1, 2) == cplx(2e8, 0.0));
}

TEST_CASE("derive_linear is deterministic") {
  std::mt19937_64 rng(21);
  const CoupledCavityModel m = grouped_model(5, rng);
  const DerivedLinear a = derive_linear(m), b = derive_linear(m);
  CHECK(a.T == b.T);
  CHECK(a.gamma_bar == b.gamma_bar);
  CHECK(a.Gamma_bar == b.Gamma_bar);
}
