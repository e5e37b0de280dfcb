#pragma once

#include <random>
#include <string>

#include "ccg/model.hpp"
#include "ccg/ringscene.hpp"

namespace testing {

using namespace ccg;

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = {n(rng), n(rng)};
  }
  return m;
}

inline CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  const CMatrix a = random_complex(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(n, n, rng));
  return qr.householderQ();
}

/// One cavity at `omega` coupled with rate `rate` to a bus and a phantom
/// channel (critical coupling).
inline CoupledCavityModel single_cavity(double rate, double v, double omega) {
  CoupledCavityModel m;
  m.channels = {{"bus", omega, v, Direction::Forward, ChannelKind::Bus},
                {"loss", omega, v, Direction::Forward, ChannelKind::Phantom}};
  m.cavities = {{"a", omega, v}};
  m.gamma = CMatrix::Constant(1, 2, cplx(rate, 0.0));
  m.g = CMatrix::Zero(1, 1);
  m.C = CMatrix::Zero(2, 2);
  return m;
}

inline constexpr double kPumpRate = 8.72769e8;
inline constexpr double kPumpVelocity = 7.1532e7;
inline constexpr double kPumpOmega = 1.218e15;

/// Small-grid copy of the paper scenario at the reference lambda.
inline ScenarioParams small_scenario(int points = 61, double lambda = 0.105326) {
  ScenarioParams p;
  p.grid = KGrid::symmetric(points, kStandardHalfSpan);
  p.coupling.lambda = lambda;
  return p;
}

}  // namespace testing
