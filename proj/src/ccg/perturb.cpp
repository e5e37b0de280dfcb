#include "ccg/perturb.hpp"

#include <algorithm>

#include "ccg/error.hpp"

namespace ccg {

CVector PerturbFilter::row(int channel, int cavity) const {
  CVector r(grid.n_points);
  for (int q = 0; q < grid.n_points; ++q) r[q] = L[q](channel, cavity);
  return r;
}

PerturbFilter build_filter(const DerivedLinear& d, const KGrid& grid) {
  PerturbFilter f;
  f.grid = grid;
  f.channel_labels = d.channel_labels;
  f.cavity_labels = d.cavity_labels;
  f.channel_velocity = d.channel_velocity;
  const Eigen::Index N = d.num_cavities();
  const CMatrix out_map = d.T * d.channel_velocity.cwiseInverse().asDiagonal() *
                          d.gamma_bar.adjoint();
  f.L.reserve(static_cast<std::size_t>(grid.n_points));
  f.S.reserve(static_cast<std::size_t>(grid.n_points));
  for (int q = 0; q < grid.n_points; ++q) {
    CMatrix sys = d.Gamma_bar;
    for (Eigen::Index m = 0; m < N; ++m) {
      sys(m, m) += -I * grid.at(q) * d.cavity_velocity[m];
    }
    Eigen::FullPivLU<CMatrix> lu(sys);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
      throw Error(ErrorCode::SingularSystem,
                  "linear resolvent singular at k=" + std::to_string(grid.at(q)));
    }
    const CMatrix R = lu.inverse();
    f.L.push_back(out_map * R);
    f.S.push_back(d.T - f.L.back() * d.gamma_bar);
  }
  return f;
}

CMatrix perturbative_beta_h(const PerturbFilter& f, const GammaBlocks& blocks,
                            int i, int j) {
  const int n = f.grid.n_points;
  const int J = static_cast<int>(f.channel_labels.size());
  if (i < 0 || i >= J || j < 0 || j >= J) {
    throw Error(ErrorCode::UnknownLabel, "channel index out of range");
  }
  if (!(blocks.grid == f.grid)) {
    throw Error(ErrorCode::InvalidArgument, "filter and blocks grids differ");
  }
  CMatrix out = CMatrix::Zero(n, n);
  for (const auto& [key, g] : blocks.sq) {
    const CVector li = f.row(i, key.first);
    const CVector lj = f.row(j, key.second);
    if (li.cwiseAbs().maxCoeff() == 0.0 || lj.cwiseAbs().maxCoeff() == 0.0) {
      continue;
    }
    out.noalias() += li.asDiagonal() * g * lj.asDiagonal();
  }
  return out * (f.grid.dk() * f.channel_velocity[j]);
}

CMatrix perturbative_beta(const PerturbFilter& f, const GammaBlocks& blocks,
                          int i, int j) {
  const int n = f.grid.n_points;
  const int J = static_cast<int>(f.channel_labels.size());
  CMatrix out = CMatrix::Zero(n, n);
  for (int l = 0; l < J; ++l) {
    CVector s(n);
    for (int q = 0; q < n; ++q) s[q] = std::conj(f.S[q](l, j));
    if (s.cwiseAbs().maxCoeff() == 0.0) continue;
    out.noalias() += perturbative_beta_h(f, blocks, i, l) * s.asDiagonal();
  }
  return out;
}

namespace {

int find_label(const std::vector<std::string>& labels, const std::string& l) {
  const auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) {
    throw Error(ErrorCode::UnknownLabel, "unknown output mode '" + l + "'");
  }
  return static_cast<int>(it - labels.begin());
}

}  // namespace

JointSpectralAmplitude perturbative_jsa(const PerturbFilter& f,
                                        const GammaBlocks& blocks,
                                        const std::string& mode_i,
                                        const std::string& mode_j) {
  const int i = find_label(f.channel_labels, mode_i);
  const int j = find_label(f.channel_labels, mode_j);
  JointSpectralAmplitude out;
  out.grid = f.grid;
  out.row_label = mode_i;
  out.col_label = mode_j;
  out.partner = "(" + mode_j + "," + mode_i + ")";
  const CMatrix b = perturbative_beta_h(f, blocks, i, j);
  out.values = b / f.grid.dk();
  if (b.norm() > kLowGainAdvisory) {
    out.advisory = "first-order beta^h norm " + std::to_string(b.norm()) +
                   " exceeds the low-gain range";
  }
  return out;
}

JointSpectralAmplitude perturbative_jsa(const DerivedLinear& derived,
                                        const GammaBlocks& blocks,
                                        const std::string& mode_i,
                                        const std::string& mode_j) {
  return perturbative_jsa(build_filter(derived, blocks.grid), blocks, mode_i,
                          mode_j);
}

RVector filter_marginals(const PerturbFilter& f, int channel, int cavity) {
  if (channel < 0 || channel >= static_cast<int>(f.channel_labels.size()) ||
      cavity < 0 || cavity >= static_cast<int>(f.cavity_labels.size())) {
    throw Error(ErrorCode::UnknownLabel, "filter index out of range");
  }
  return f.row(channel, cavity).cwiseAbs();
}

}  // namespace ccg
