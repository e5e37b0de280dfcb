#include "ccg/settom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccg/error.hpp"

namespace ccg {

SETDataset simulate_set(const SymplecticKernel& kernel,
                        const std::string& signal_bus,
                        const std::string& idler_bus) {
  const int s = kernel.channel_index(signal_bus);
  const int i = kernel.channel_index(idler_bus);
  SETDataset d;
  d.grid = kernel.grid;
  d.signal_label = signal_bus;
  d.idler_label = idler_bus;
  d.beta12 = kernel.beta(s, i);
  d.beta21 = kernel.beta(i, s);
  return d;
}

SETDataset simulate_set_first_order(const PerturbFilter& filter,
                                    const GammaBlocks& blocks,
                                    const std::string& signal_bus,
                                    const std::string& idler_bus) {
  const auto idx = [&](const std::string& l) {
    const auto it =
        std::find(filter.channel_labels.begin(), filter.channel_labels.end(), l);
    if (it == filter.channel_labels.end()) {
      throw Error(ErrorCode::UnknownLabel, "unknown bus mode '" + l + "'");
    }
    return static_cast<int>(it - filter.channel_labels.begin());
  };
  const int s = idx(signal_bus);
  const int i = idx(idler_bus);
  SETDataset d;
  d.grid = filter.grid;
  d.signal_label = signal_bus;
  d.idler_label = idler_bus;
  d.beta12 = perturbative_beta(filter, blocks, s, i);
  d.beta21 = perturbative_beta(filter, blocks, i, s);
  return d;
}

void fix_column_phases(CMatrix& u, CMatrix& v, bool from_high_end) {
  const Eigen::Index n = u.rows();
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const RVector mag = u.col(c).cwiseAbs();
    const double top = mag.maxCoeff();
    Eigen::Index r = -1;
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::Index q = from_high_end ? n - 1 - s : s;
      if (mag[q] >= top * (1.0 - kPhaseTieTolerance)) {
        r = q;
        break;
      }
    }
    if (r < 0 || top == 0.0) continue;
    const cplx z = u(r, c);
    const cplx ph = std::conj(z) / std::abs(z);
    u.col(c) *= ph;
    if (c < v.cols()) v.col(c) *= ph;
  }
}

namespace {

int numerical_rank(const RVector& s, Eigen::Index n) {
  if (s.size() == 0 || !(s[0] > 0.0)) return 0;
  const double tol =
      std::numeric_limits<double>::epsilon() * static_cast<double>(n) * s[0];
  return static_cast<int>((s.array() > tol).count());
}

}  // namespace

SetReconstruction reconstruct_standard(const SETDataset& data) {
  const Eigen::Index n = data.beta12.rows();
  if (data.beta12.cols() != n || data.beta21.rows() != n ||
      data.beta21.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "SET blocks must be square and equal");
  }
  Svd a = svd(data.beta12);  // U1 D V2^dagger
  Svd b = svd(data.beta21);  // U2 D' V1^dagger
  SetReconstruction out;
  out.rank12 = numerical_rank(a.S, n);
  out.rank21 = numerical_rank(b.S, n);
  if (out.rank12 == 0 || out.rank21 == 0) {
    throw Error(ErrorCode::ZeroNorm, "SET dataset has a zero block");
  }
  out.rank_deficient = out.rank12 != out.rank21;
  const int r = std::min(out.rank12, out.rank21);

  // idler modes mirror the signal's k dependence, so their ties resolve
  // from the high-k end
  fix_column_phases(a.U, a.V, false);
  fix_column_phases(b.U, b.V, true);

  // Degenerate clusters of D': rotate U2 so U2^+ beta21 V1 D'^-1 is
  // Hermitian positive within the cluster.
  const double gap = 1e-10 * b.S[0];
  for (int c0 = 0; c0 < r;) {
    int c1 = c0 + 1;
    while (c1 < r && b.S[c1 - 1] - b.S[c1] <= gap) ++c1;
    if (c1 - c0 > 1) {
      const int w = c1 - c0;
      const CMatrix q = b.U.middleCols(c0, w).adjoint() * data.beta21 *
                        b.V.middleCols(c0, w) *
                        b.S.segment(c0, w).cwiseInverse().asDiagonal();
      const Svd qs = svd(q);
      b.U.middleCols(c0, w) = (b.U.middleCols(c0, w) * qs.U * qs.V.adjoint()).eval();
    }
    c0 = c1;
  }

  out.singular_values = a.S.head(r);
  const CMatrix inferred = a.U.leftCols(r) * a.S.head(r).asDiagonal() *
                           b.U.leftCols(r).transpose();
  out.inferred.grid = data.grid;
  out.inferred.row_label = data.signal_label;
  out.inferred.col_label = data.idler_label;
  out.inferred.partner = "(" + data.idler_label + "," + data.signal_label + ")";
  out.inferred.values = inferred / data.grid.dk();
  return out;
}

SetComparison compare_set(const SetReconstruction& rec,
                          const JointSpectralAmplitude& truth) {
  SetComparison c;
  c.fidelity = jsa_fidelity(rec.inferred, truth);
  c.true_purity = schmidt(truth).purity;
  c.inferred_purity = schmidt_purity(rec.singular_values);
  c.purity_gap = c.inferred_purity - c.true_purity;
  c.rank_deficient = rec.rank_deficient;
  return c;
}

}  // namespace ccg
