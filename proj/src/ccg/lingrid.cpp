#include "ccg/lingrid.hpp"

#include <algorithm>
#include <cmath>

#include "ccg/error.hpp"

namespace ccg {

KGrid::KGrid(int n, double lo, double hi) : n_points(n), k_min(lo), k_max(hi) {
  if (n < 2 || !(hi > lo)) {
    throw Error(ErrorCode::InvalidArgument,
                "KGrid needs at least 2 points and k_max > k_min");
  }
}

KGrid KGrid::symmetric(int n, double half_span) {
  return KGrid(n, -half_span, half_span);
}

KGrid KGrid::standard() {
  return symmetric(kStandardPoints, kStandardHalfSpan);
}

RVector KGrid::values() const {
  RVector v(n_points);
  for (int i = 0; i < n_points; ++i) v[i] = at(i);
  return v;
}

int SpectralField::mode_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  throw Error(ErrorCode::UnknownLabel, "unknown field mode '" + label + "'");
}

SpectralField top_hat(const KGrid& grid, const std::vector<std::string>& labels,
                      const std::string& label, cplx amplitude) {
  SpectralField f;
  f.grid = grid;
  f.labels = labels;
  f.amplitudes = CMatrix::Zero(static_cast<Eigen::Index>(labels.size()),
                               grid.n_points);
  f.amplitudes.row(f.mode_index(label)).setConstant(amplitude);
  return f;
}

namespace {

CMatrix resolvent_rhs(const DerivedLinear& d, double k, const CMatrix& rhs) {
  const Eigen::Index N = d.num_cavities();
  CMatrix sys = d.Gamma_bar;
  for (Eigen::Index n = 0; n < N; ++n) sys(n, n) += -I * k * d.cavity_velocity[n];
  Eigen::FullPivLU<CMatrix> lu(sys);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::SingularSystem,
                "resolvent (-i k Vc + Gamma_bar) is singular at k=" +
                    std::to_string(k));
  }
  return lu.solve(rhs);
}

}  // namespace

CMatrix linear_scattering_matrix(const DerivedLinear& d, double k) {
  const Eigen::Index J = d.num_channels();
  const RVector inv_v = d.channel_velocity.cwiseInverse();
  const CMatrix r = resolvent_rhs(d, k, d.gamma_bar);
  return d.T * (CMatrix::Identity(J, J) -
                inv_v.asDiagonal() * d.gamma_bar.adjoint() * r);
}

PumpSolution solve_linear_tuned(const DerivedLinear& d,
                                const SpectralField& input) {
  const Eigen::Index J = d.num_channels();
  const Eigen::Index N = d.num_cavities();
  if (input.amplitudes.rows() != J ||
      input.amplitudes.cols() != input.grid.n_points) {
    throw Error(ErrorCode::InvalidArgument,
                "input field shape does not match the model");
  }
  PumpSolution sol;
  sol.input = input;
  sol.intracavity.grid = input.grid;
  sol.intracavity.labels = d.cavity_labels;
  sol.intracavity.amplitudes = CMatrix::Zero(N, input.grid.n_points);
  sol.transmitted.grid = input.grid;
  sol.transmitted.labels = d.channel_labels;
  sol.transmitted.amplitudes = CMatrix::Zero(J, input.grid.n_points);

  const RVector inv_v = d.channel_velocity.cwiseInverse();
  for (int i = 0; i < input.grid.n_points; ++i) {
    const double k = input.grid.at(i);
    const CVector s_in = input.amplitudes.col(i);
    const CVector a = -I * resolvent_rhs(d, k, d.gamma_bar * s_in);
    sol.intracavity.amplitudes.col(i) = a;
    sol.transmitted.amplitudes.col(i) =
        d.T * (s_in - I * (inv_v.asDiagonal() * (d.gamma_bar.adjoint() * a)));
  }
  return sol;
}

namespace {

// Linear interpolation of one row on a uniform grid; nullopt outside.
std::optional<cplx> interpolate(const KGrid& grid, const CMatrix& rows,
                                Eigen::Index row, double k) {
  const double x = (k - grid.k_min) / grid.dk();
  const double tol = 1e-9;
  if (x < -tol || x > grid.n_points - 1 + tol) return std::nullopt;
  const double xc = std::clamp(x, 0.0, static_cast<double>(grid.n_points - 1));
  int i0 = static_cast<int>(std::floor(xc));
  if (i0 >= grid.n_points - 1) i0 = grid.n_points - 2;
  const double f = xc - i0;
  return (1.0 - f) * rows(row, i0) + f * rows(row, i0 + 1);
}

CMatrix absolute_system(const DerivedLinear& d, double xi) {
  const Eigen::Index N = d.num_cavities();
  const RVector& vc = d.cavity_velocity;
  CMatrix sys = vc.asDiagonal() * d.Gamma_bar * vc.cwiseInverse().asDiagonal();
  for (Eigen::Index n = 0; n < N; ++n) {
    sys(n, n) += -I * (xi - d.cavity_frequency[n]);
  }
  return sys;
}

}  // namespace

CMatrix absolute_frequency_scattering_matrix(const DerivedLinear& d,
                                             double xi) {
  const Eigen::Index J = d.num_channels();
  const RVector& v = d.channel_velocity;
  const RVector& vc = d.cavity_velocity;
  const CMatrix sys = absolute_system(d, xi);
  Eigen::FullPivLU<CMatrix> lu(sys);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularSystem, "singular absolute-frequency system");
  }
  // s+ = T (s- - i gamma_bar^dagger Vc^-1 a),  a = -i sys^-1 Vc gamma_bar V^-1 s-
  const CMatrix drive = vc.asDiagonal() * d.gamma_bar * v.cwiseInverse().asDiagonal();
  const CMatrix s = d.T * (CMatrix::Identity(J, J) -
                           d.gamma_bar.adjoint() * vc.cwiseInverse().asDiagonal() *
                               lu.solve(drive));
  RVector sq = v.cwiseSqrt();
  return sq.cwiseInverse().asDiagonal() * s * sq.asDiagonal();
}

AbsoluteFrequencySolution solve_linear_absolute_frequency(
    const DerivedLinear& d, const SpectralField& input,
    std::span<const double> frequency_samples) {
  const Eigen::Index J = d.num_channels();
  const Eigen::Index N = d.num_cavities();
  const Eigen::Index M = static_cast<Eigen::Index>(frequency_samples.size());
  if (input.amplitudes.rows() != J) {
    throw Error(ErrorCode::InvalidArgument,
                "input field shape does not match the model");
  }
  AbsoluteFrequencySolution out;
  out.xi.resize(M);
  out.channel_k.resize(J, M);
  out.cavity_k.resize(N, M);
  out.input = CMatrix::Zero(J, M);
  out.intracavity = CMatrix::Zero(N, M);
  out.transmitted = CMatrix::Zero(J, M);

  const RVector& v = d.channel_velocity;
  const RVector& vc = d.cavity_velocity;
  const CMatrix drive = vc.asDiagonal() * d.gamma_bar * v.cwiseInverse().asDiagonal();
  const CMatrix out_map = d.gamma_bar.adjoint() * vc.cwiseInverse().asDiagonal();

  for (Eigen::Index m = 0; m < M; ++m) {
    const double xi = frequency_samples[static_cast<std::size_t>(m)];
    out.xi[m] = xi;
    CVector s_in(J);
    for (Eigen::Index j = 0; j < J; ++j) {
      const double k = (xi - d.channel_frequency[j]) / v[j];
      out.channel_k(j, m) = k;
      const auto val = interpolate(input.grid, input.amplitudes, j, k);
      if (!val) {
        if (input.amplitudes.row(j).cwiseAbs().maxCoeff() > 0.0) {
          throw Error(ErrorCode::OutOfSupport,
                      "frequency " + std::to_string(xi) +
                          " maps outside the input support of channel " +
                          d.channel_labels[static_cast<std::size_t>(j)]);
        }
        s_in[j] = 0.0;
      } else {
        s_in[j] = *val;
      }
    }
    for (Eigen::Index n = 0; n < N; ++n) {
      out.cavity_k(n, m) = (xi - d.cavity_frequency[n]) / vc[n];
    }
    Eigen::FullPivLU<CMatrix> lu(absolute_system(d, xi));
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::SingularSystem,
                  "singular absolute-frequency system at xi=" +
                      std::to_string(xi));
    }
    const CVector a = -I * lu.solve(drive * s_in);
    out.input.col(m) = s_in;
    out.intracavity.col(m) = a;
    out.transmitted.col(m) = d.T * (s_in - I * (out_map * a));
  }
  return out;
}

SpectralField resample_transmitted(const AbsoluteFrequencySolution& sol,
                                   const KGrid& grid,
                                   const std::vector<std::string>& labels) {
  SpectralField f;
  f.grid = grid;
  f.labels = labels;
  const Eigen::Index J = sol.transmitted.rows();
  const Eigen::Index M = sol.xi.size();
  f.amplitudes = CMatrix::Zero(J, grid.n_points);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (int i = 0; i < grid.n_points; ++i) {
      const double k = grid.at(i);
      for (Eigen::Index m = 0; m + 1 < M; ++m) {
        const double k0 = sol.channel_k(j, m), k1 = sol.channel_k(j, m + 1);
        const double lo = std::min(k0, k1), hi = std::max(k0, k1);
        if (k < lo - 1e-12 * std::abs(hi) || k > hi + 1e-12 * std::abs(hi)) {
          continue;
        }
        const double t = (k1 == k0) ? 0.0 : (k - k0) / (k1 - k0);
        f.amplitudes(j, i) = (1.0 - t) * sol.transmitted(j, m) +
                             t * sol.transmitted(j, m + 1);
        break;
      }
    }
  }
  return f;
}

cplx ConvolutionSeries::at(double q) const {
  const Eigen::Index n = values.size();
  const double x = (q - q_min) / dq;
  if (x < 0.0 || x > static_cast<double>(n - 1)) return {0.0, 0.0};
  Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(x));
  if (i0 >= n - 1) i0 = n - 2;
  const double f = x - static_cast<double>(i0);
  return (1.0 - f) * values[i0] + f * values[i0 + 1];
}

ConvolutionSeries convolve(const KGrid& grid, const CVector& f,
                           const CVector& h) {
  const Eigen::Index n = grid.n_points;
  if (f.size() != n || h.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "convolve: size mismatch");
  }
  ConvolutionSeries out;
  out.q_min = 2.0 * grid.k_min;
  out.dq = grid.dk();
  out.values = CVector::Zero(2 * n - 1);
  for (Eigen::Index a = 0; a < n; ++a) {
    if (f[a] == cplx{0.0, 0.0}) continue;
    for (Eigen::Index b = 0; b < n; ++b) out.values[a + b] += f[a] * h[b];
  }
  out.values *= grid.dk();
  return out;
}

ConvolutionTable pump_convolutions(const PumpSolution& pump,
                                   const std::vector<ConvolutionSpec>& specs) {
  const KGrid& grid = pump.intracavity.grid;
  ConvolutionTable table;
  table.grid = grid;
  table.specs = specs;
  const int n = grid.n_points;
  for (const auto& s : specs) {
    if (s.pump_a < 0 || s.pump_a >= pump.intracavity.num_modes() ||
        s.pump_b < 0 || s.pump_b >= pump.intracavity.num_modes()) {
      throw Error(ErrorCode::InvalidArgument,
                  "convolution spec references a missing pump mode");
    }
    const ConvolutionSeries series =
        convolve(grid, pump.intracavity.amplitudes.row(s.pump_a).transpose(),
                 pump.intracavity.amplitudes.row(s.pump_b).transpose());
    CMatrix e(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double q =
            (s.v_signal * grid.at(a) + s.v_idler * grid.at(b) + s.detuning) /
            s.v_pump_b;
        e(a, b) = series.at(q);
      }
    }
    table.entries.push_back(std::move(e));
  }
  return table;
}

std::optional<LineshapeStats> extract_lineshape_stats(
    const SpectralField& transmitted, int channel) {
  const int n = transmitted.grid.n_points;
  if (channel < 0 || channel >= transmitted.num_modes() || n < 5) {
    return std::nullopt;
  }
  RVector p(n);
  for (int i = 0; i < n; ++i) {
    p[i] = std::norm(transmitted.amplitudes(channel, i));
  }
  const int edge = std::max(1, static_cast<int>(std::lround(0.05 * n)));
  const double plateau =
      0.5 * (p.head(edge).mean() + p.tail(edge).mean());
  Eigen::Index imin = 0;
  const double pmin = p.minCoeff(&imin);
  if (!(plateau - pmin > 1e-9 * std::max(plateau, 1e-300))) return std::nullopt;
  const double half = 0.5 * (plateau + pmin);

  const auto k = [&](double x) {
    return transmitted.grid.k_min + x * transmitted.grid.dk();
  };
  std::optional<double> left, right;
  for (Eigen::Index i = imin; i > 0; --i) {
    if (p[i - 1] >= half) {
      const double t = (half - p[i]) / (p[i - 1] - p[i]);
      left = k(static_cast<double>(i) - t);
      break;
    }
  }
  for (Eigen::Index i = imin; i + 1 < n; ++i) {
    if (p[i + 1] >= half) {
      const double t = (half - p[i]) / (p[i + 1] - p[i]);
      right = k(static_cast<double>(i) + t);
      break;
    }
  }
  if (!left || !right) return std::nullopt;
  LineshapeStats s;
  s.linewidth = *right - *left;
  s.center = transmitted.grid.at(static_cast<int>(imin));
  s.min_transmission = pmin;
  s.plateau = plateau;
  return s;
}

}  // namespace ccg
