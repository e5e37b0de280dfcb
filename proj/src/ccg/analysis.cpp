#include "ccg/analysis.hpp"

#include <cmath>
#include <limits>

#include "ccg/error.hpp"

namespace ccg {

double schmidt_purity(const RVector& s) {
  const double p2 = s.squaredNorm();
  if (!(p2 > 0.0)) {
    throw Error(ErrorCode::ZeroNorm, "purity undefined for an all-zero JSA");
  }
  return s.array().square().square().sum() / (p2 * p2);
}

SchmidtSpectrum schmidt(const JointSpectralAmplitude& jsa) {
  if (jsa.values.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "empty JSA");
  }
  SchmidtSpectrum out;
  out.singular_values = singular_values(jsa.values);
  out.purity = schmidt_purity(out.singular_values);
  const double dk = jsa.grid.dk();
  out.pair_probability = out.singular_values.squaredNorm() * dk * dk;
  const double tol = std::numeric_limits<double>::epsilon() *
                     static_cast<double>(jsa.values.rows()) *
                     out.singular_values[0];
  out.numerical_rank =
      static_cast<int>((out.singular_values.array() > tol).count());
  return out;
}

namespace {

struct PaddedAxis {
  RVector k;
  RVector t;
  double dw = 0.0;
};

PaddedAxis padded_axis(const KGrid& grid, double v, int pad) {
  const int n = grid.n_points;
  const int m = pad * n;
  PaddedAxis a;
  a.k.resize(m);
  a.t.resize(m);
  const double dk = grid.dk();
  const int lead = (pad - 1) / 2 * n;
  for (int q = 0; q < m; ++q) a.k[q] = grid.k_min + (q - lead) * dk;
  a.dw = v * dk;
  const double dt = 2.0 * kPi / (m * a.dw);
  const double mid = 0.5 * (m - 1);
  for (int q = 0; q < m; ++q) a.t[q] = (q - mid) * dt;
  return a;
}

// F(t_q, k_p) = dw / sqrt(2 pi) exp(-i v k_p t_q)
CMatrix forward_matrix(const PaddedAxis& a, double v) {
  const Eigen::Index m = a.k.size();
  CMatrix f(m, m);
  const double scale = a.dw / std::sqrt(2.0 * kPi);
  for (Eigen::Index q = 0; q < m; ++q) {
    for (Eigen::Index p = 0; p < m; ++p) {
      f(q, p) = scale * std::exp(-I * (v * a.k[p] * a.t[q]));
    }
  }
  return f;
}

}  // namespace

JointTemporalAmplitude jta(const JointSpectralAmplitude& jsa, double v_row,
                           double v_col) {
  constexpr int pad = 3;
  const int n = jsa.grid.n_points;
  if (jsa.values.rows() != n || jsa.values.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "JSA shape does not match grid");
  }
  const PaddedAxis ar = padded_axis(jsa.grid, v_row, pad);
  const PaddedAxis ac = padded_axis(jsa.grid, v_col, pad);
  CMatrix padded = CMatrix::Zero(pad * n, pad * n);
  padded.block(n, n, n, n) = jsa.values;
  JointTemporalAmplitude out;
  out.t_row = ar.t;
  out.t_col = ac.t;
  out.values = forward_matrix(ar, v_row) * padded *
               forward_matrix(ac, v_col).transpose();
  out.display_half_window = kDisplayHalfWindow;
  out.padding_factor = pad;
  return out;
}

CMatrix inverse_jta(const JointTemporalAmplitude& t, const KGrid& grid,
                    double v_row, double v_col) {
  const PaddedAxis ar = padded_axis(grid, v_row, t.padding_factor);
  const PaddedAxis ac = padded_axis(grid, v_col, t.padding_factor);
  const CMatrix fr = forward_matrix(ar, v_row);
  const CMatrix fc = forward_matrix(ac, v_col);
  // The forward matrices are unitary up to dw dt / (2 pi) m = 1.
  const double sr = (ar.t[1] - ar.t[0]) / ar.dw;
  const double sc = (ac.t[1] - ac.t[0]) / ac.dw;
  return sr * sc * fr.adjoint() * t.values * fc.conjugate();
}

double jsa_fidelity(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::InvalidArgument, "JSA shapes differ");
  }
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw Error(ErrorCode::ZeroNorm, "fidelity of a zero-norm JSA");
  }
  const cplx overlap = (a.conjugate().cwiseProduct(b)).sum();
  return std::norm(overlap) / (na * nb);
}

double jsa_fidelity(const JointSpectralAmplitude& a,
                    const JointSpectralAmplitude& b) {
  if (!(a.grid == b.grid)) {
    throw Error(ErrorCode::InvalidArgument, "JSA grids differ");
  }
  return jsa_fidelity(a.values, b.values);
}

HeraldedMixture::HeraldedMixture(int dimension)
    : rho_(CMatrix::Zero(dimension, dimension)) {}

void HeraldedMixture::add(const CMatrix& b, double weight) {
  if (b.rows() != rho_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "mixture member has wrong size");
  }
  const double tr = b.squaredNorm();
  if (!(tr > 0.0)) {
    throw Error(ErrorCode::ZeroNorm, "zero-norm mixture member");
  }
  rho_.noalias() += (weight / tr) * (b * b.adjoint());
  weight_ += weight;
  ++count_;
}

double HeraldedMixture::purity() const {
  if (!(weight_ > 0.0)) {
    throw Error(ErrorCode::ZeroNorm, "empty mixture");
  }
  // tr(rho^2) for Hermitian rho is the squared Frobenius norm.
  return rho_.squaredNorm() / (weight_ * weight_);
}

double ensemble_purity(const std::vector<JointSpectralAmplitude>& jsas,
                       const std::vector<double>& weights) {
  if (jsas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty ensemble");
  }
  if (!weights.empty() && weights.size() != jsas.size()) {
    throw Error(ErrorCode::InvalidArgument, "weights/ensemble size mismatch");
  }
  HeraldedMixture mix(static_cast<int>(jsas.front().values.rows()));
  for (std::size_t m = 0; m < jsas.size(); ++m) {
    if (!(jsas[m].grid == jsas.front().grid)) {
      throw Error(ErrorCode::InvalidArgument, "ensemble grids differ");
    }
    mix.add(jsas[m].values, weights.empty() ? 1.0 : weights[m]);
  }
  return mix.purity();
}

}  // namespace ccg
