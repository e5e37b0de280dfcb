#include "ccg/gaussdyn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccg/error.hpp"

namespace ccg {

CMatrix GammaBlocks::block(int row, int col) const {
  const auto it = sq.find({row, col});
  if (it == sq.end()) return CMatrix::Zero(grid.n_points, grid.n_points);
  return it->second;
}

double GammaBlocks::drive_norm() const {
  double s = 0.0;
  for (const auto& [key, m] : sq) s += m.squaredNorm();
  return std::sqrt(s) * grid.dk();
}

GammaBlocks build_gamma_sq(const ConvolutionTable& table,
                           const NonlinearCoupling& coupling,
                           const std::vector<SqWiring>& wiring,
                           int num_cavities) {
  GammaBlocks out;
  out.grid = table.grid;
  out.num_cavities = num_cavities;
  const int n = table.grid.n_points;
  for (const auto& w : wiring) {
    if (w.table_entry < 0 ||
        w.table_entry >= static_cast<int>(table.entries.size())) {
      throw Error(ErrorCode::InvalidArgument,
                  "squeezing wiring references a missing convolution entry");
    }
    if (w.row_cavity < 0 || w.row_cavity >= num_cavities || w.col_cavity < 0 ||
        w.col_cavity >= num_cavities) {
      throw Error(ErrorCode::InvalidArgument,
                  "squeezing wiring references a missing cavity");
    }
    const CMatrix& c = table.entries[static_cast<std::size_t>(w.table_entry)];
    if (c.rows() != n || c.cols() != n) {
      throw Error(ErrorCode::InvalidArgument, "convolution entry has wrong size");
    }
    const cplx pre = I / (2.0 * kPi) * coupling.lambda * w.velocity * w.pump_ratio;
    auto [it, fresh] = out.sq.try_emplace({w.row_cavity, w.col_cavity},
                                          CMatrix::Zero(n, n));
    it->second += pre * c;
  }
  return out;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

int node_id(ModeNode m, int J) { return m.branch * J + m.channel; }
ModeNode flip(ModeNode m) { return {1 - m.branch, m.channel}; }

struct Layout {
  std::vector<KernelComponent> components;
  std::vector<int> node_component;
  std::vector<int> node_position;
  // cavity nodes (branch, cavity) per stored component
  std::vector<std::vector<std::pair<int, int>>> cavities;
};

Layout build_layout(const DerivedLinear& d, const GammaBlocks& blocks) {
  const int J = d.num_channels();
  const int N = d.num_cavities();
  DisjointSets sets(2 * J + 2 * N);
  const auto cav = [&](int b, int m) { return 2 * J + b * N + m; };
  for (int b = 0; b < 2; ++b) {
    for (int j = 0; j < J; ++j) {
      for (int l = 0; l < J; ++l) {
        if (d.T(j, l) != cplx{0.0, 0.0}) sets.join(b * J + j, b * J + l);
      }
      for (int m = 0; m < N; ++m) {
        if (d.gamma_bar(m, j) != cplx{0.0, 0.0}) sets.join(b * J + j, cav(b, m));
      }
    }
    for (int m = 0; m < N; ++m) {
      for (int l = 0; l < N; ++l) {
        if (d.Gamma_bar(m, l) != cplx{0.0, 0.0}) sets.join(cav(b, m), cav(b, l));
      }
    }
  }
  for (const auto& [key, mat] : blocks.sq) {
    if (mat.cwiseAbs().maxCoeff() == 0.0) continue;
    sets.join(cav(0, key.first), cav(1, key.second));
    sets.join(cav(1, key.first), cav(0, key.second));
  }

  Layout L;
  L.node_component.assign(static_cast<std::size_t>(2 * J), -1);
  L.node_position.assign(static_cast<std::size_t>(2 * J), -1);
  for (int id = 0; id < 2 * J; ++id) {
    if (L.node_component[id] >= 0) continue;
    const int root = sets.find(id);
    const ModeNode first{id / J, id % J};
    const int mirror_id = node_id(flip(first), J);
    const int mirror_comp =
        L.node_component[mirror_id] >= 0 ? L.node_component[mirror_id] : -1;

    KernelComponent comp;
    std::vector<std::pair<int, int>> cavs;
    if (mirror_comp >= 0) {
      comp.mirror_of = mirror_comp;
      for (const ModeNode& m : L.components[mirror_comp].nodes) {
        comp.nodes.push_back(flip(m));
      }
    } else {
      for (int other = 0; other < 2 * J; ++other) {
        if (sets.find(other) == root) comp.nodes.push_back({other / J, other % J});
      }
      for (int b = 0; b < 2; ++b) {
        for (int m = 0; m < N; ++m) {
          if (sets.find(cav(b, m)) == root) cavs.emplace_back(b, m);
        }
      }
    }
    const int index = static_cast<int>(L.components.size());
    for (std::size_t p = 0; p < comp.nodes.size(); ++p) {
      const int nid = node_id(comp.nodes[p], J);
      L.node_component[nid] = index;
      L.node_position[nid] = static_cast<int>(p);
    }
    L.components.push_back(std::move(comp));
    L.cavities.push_back(std::move(cavs));
  }
  return L;
}

cplx branch_value(cplx z, int branch) { return branch == 0 ? z : std::conj(z); }

CMatrix solve_component(const DerivedLinear& d, const GammaBlocks& blocks,
                        const KernelComponent& comp,
                        const std::vector<std::pair<int, int>>& cavs) {
  const int n = blocks.grid.n_points;
  const double dk = blocks.grid.dk();
  const RVector kv = blocks.grid.values();
  const Eigen::Index Jc = static_cast<Eigen::Index>(comp.nodes.size());
  const Eigen::Index Nc = static_cast<Eigen::Index>(cavs.size());

  CMatrix M = CMatrix::Zero(Jc * n, Jc * n);
  for (Eigen::Index o = 0; o < Jc; ++o) {
    for (Eigen::Index l = 0; l < Jc; ++l) {
      const ModeNode a = comp.nodes[o], b = comp.nodes[l];
      if (a.branch != b.branch) continue;
      const cplx t = branch_value(d.T(a.channel, b.channel), a.branch);
      if (t == cplx{0.0, 0.0}) continue;
      for (int q = 0; q < n; ++q) M(o * n + q, l * n + q) = t;
    }
  }
  if (Nc == 0) return M;

  CMatrix A = CMatrix::Zero(Nc * n, Nc * n);
  for (Eigen::Index r = 0; r < Nc; ++r) {
    const auto [br, mr] = cavs[r];
    for (Eigen::Index c = 0; c < Nc; ++c) {
      const auto [bc, mc] = cavs[c];
      if (br == bc) {
        const cplx g = branch_value(d.Gamma_bar(mr, mc), br);
        for (int q = 0; q < n; ++q) A(r * n + q, c * n + q) += g;
        if (mr == mc) {
          const double sign = br == 0 ? -1.0 : 1.0;
          for (int q = 0; q < n; ++q) {
            A(r * n + q, c * n + q) += sign * I * d.cavity_velocity[mr] * kv[q];
          }
        }
      } else if (blocks.has(mr, mc)) {
        const CMatrix& g = blocks.sq.at({mr, mc});
        if (br == 0) {
          A.block(r * n, c * n, n, n) += dk * g;
        } else {
          A.block(r * n, c * n, n, n) += dk * g.conjugate();
        }
      }
    }
  }

  CMatrix B = CMatrix::Zero(Nc * n, Jc * n);
  for (Eigen::Index r = 0; r < Nc; ++r) {
    const auto [br, mr] = cavs[r];
    for (Eigen::Index l = 0; l < Jc; ++l) {
      const ModeNode in = comp.nodes[l];
      if (in.branch != br) continue;
      const cplx g = d.gamma_bar(mr, in.channel);
      if (g == cplx{0.0, 0.0}) continue;
      const cplx v = br == 0 ? -I * g : I * std::conj(g);
      for (int q = 0; q < n; ++q) B(r * n + q, l * n + q) = v;
    }
  }

  const CMatrix X = lu_solve(A, B);

  // out_map = T V^-1 gamma_bar^dagger (J x N)
  const CMatrix out_map = d.T * d.channel_velocity.cwiseInverse().asDiagonal() *
                          d.gamma_bar.adjoint();
  for (Eigen::Index o = 0; o < Jc; ++o) {
    const ModeNode out = comp.nodes[o];
    for (Eigen::Index r = 0; r < Nc; ++r) {
      const auto [br, mr] = cavs[r];
      if (br != out.branch) continue;
      const cplx e = out_map(out.channel, mr);
      if (e == cplx{0.0, 0.0}) continue;
      const cplx coef = br == 0 ? -I * e : I * std::conj(e);
      M.middleRows(o * n, n) += coef * X.middleRows(r * n, n);
    }
  }
  return M;
}

struct Residuals {
  double unit2 = 0.0;
  double sym2 = 0.0;
  double x2 = 0.0;
};

void accumulate_residuals(const KernelComponent& comp, bool has_mirror, int n,
                          Residuals& r) {
  const Eigen::Index Jc = static_cast<Eigen::Index>(comp.nodes.size());
  std::vector<Eigen::Index> rows_a, rows_c;
  for (Eigen::Index p = 0; p < Jc; ++p) {
    for (int q = 0; q < n; ++q) {
      (comp.nodes[p].branch == 0 ? rows_a : rows_c).push_back(p * n + q);
    }
  }
  RVector z(Jc * n);
  for (Eigen::Index p = 0; p < Jc; ++p) {
    z.segment(p * n, n).setConstant(comp.nodes[p].branch == 0 ? 1.0 : -1.0);
  }
  const CMatrix& M = comp.matrix;
  CMatrix D = M * z.asDiagonal() * M.adjoint();
  D.diagonal() -= z.cast<cplx>();

  const auto sub = [](const CMatrix& m, const std::vector<Eigen::Index>& r,
                      const std::vector<Eigen::Index>& c) {
    CMatrix s(static_cast<Eigen::Index>(r.size()),
              static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) s(i, j) = m(r[i], c[j]);
    }
    return s;
  };
  r.unit2 += sub(D, rows_a, rows_a).squaredNorm();
  r.sym2 += sub(D, rows_a, rows_c).squaredNorm();
  if (!rows_a.empty() && !rows_c.empty()) {
    r.x2 += (sub(M, rows_a, rows_a) * sub(M, rows_c, rows_a).adjoint())
                .squaredNorm();
  }
  if (has_mirror) {
    r.unit2 += sub(D, rows_c, rows_c).squaredNorm();
    r.sym2 += sub(D, rows_c, rows_a).squaredNorm();
    if (!rows_a.empty() && !rows_c.empty()) {
      r.x2 += (sub(M, rows_c, rows_c) * sub(M, rows_a, rows_c).adjoint())
                  .squaredNorm();
    }
  }
}

template <typename Parts>
CMatrix fetch_block(const std::vector<KernelComponent>& comps,
                    const Parts& p, int J, int n, ModeNode out, ModeNode in) {
  if (out.channel < 0 || out.channel >= J || in.channel < 0 ||
      in.channel >= J || out.branch < 0 || out.branch > 1 || in.branch < 0 ||
      in.branch > 1) {
    throw Error(ErrorCode::UnknownLabel, "kernel node out of range");
  }
  const int co = p.node_component[node_id(out, J)];
  const int ci = p.node_component[node_id(in, J)];
  if (co != ci) return CMatrix::Zero(n, n);
  const int po = p.node_position[node_id(out, J)];
  const int pi = p.node_position[node_id(in, J)];
  const KernelComponent& c = comps[co];
  if (c.mirror_of >= 0) {
    return comps[c.mirror_of].matrix.block(po * n, pi * n, n, n).conjugate();
  }
  return c.matrix.block(po * n, pi * n, n, n);
}

template <typename Parts>
CMatrix assemble_dense(const std::vector<KernelComponent>& comps,
                       const Parts& p, int J, int n) {
  CMatrix out = CMatrix::Zero(2 * J * n, 2 * J * n);
  for (int a = 0; a < 2 * J; ++a) {
    for (int b = 0; b < 2 * J; ++b) {
      if (p.node_component[a] != p.node_component[b]) continue;
      out.block(a * n, b * n, n, n) =
          fetch_block(comps, p, J, n, {a / J, a % J}, {b / J, b % J});
    }
  }
  return out;
}

int label_index(const std::vector<std::string>& labels,
                const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw Error(ErrorCode::UnknownLabel, "unknown output mode '" + label + "'");
  }
  return static_cast<int>(it - labels.begin());
}

}  // namespace

int SymplecticKernel::channel_index(const std::string& label) const {
  return label_index(labels, label);
}

CMatrix SymplecticKernel::block(ModeNode out, ModeNode in) const {
  return fetch_block(components, *this, num_channels(), grid.n_points, out, in);
}

CMatrix SymplecticKernel::dense() const {
  return assemble_dense(components, *this, num_channels(), grid.n_points);
}

SymplecticKernel solve_full_kernel(const DerivedLinear& derived,
                                   const GammaBlocks& blocks) {
  if (blocks.num_cavities != derived.num_cavities()) {
    throw Error(ErrorCode::InvalidArgument,
                "squeezing blocks do not match the cavity count");
  }
  const int n = blocks.grid.n_points;
  const int J = derived.num_channels();
  Layout L = build_layout(derived, blocks);

  SymplecticKernel K;
  K.grid = blocks.grid;
  K.labels = derived.channel_labels;
  Residuals res;
  std::vector<bool> mirrored(L.components.size(), false);
  for (const auto& c : L.components) {
    if (c.mirror_of >= 0) mirrored[static_cast<std::size_t>(c.mirror_of)] = true;
  }
  for (std::size_t c = 0; c < L.components.size(); ++c) {
    KernelComponent& comp = L.components[c];
    if (comp.mirror_of >= 0) continue;
    comp.matrix = solve_component(derived, blocks, comp, L.cavities[c]);
    accumulate_residuals(comp, mirrored[c], n, res);
  }
  K.components = std::move(L.components);
  K.node_component = std::move(L.node_component);
  K.node_position = std::move(L.node_position);
  K.residual_unitary = std::sqrt(res.unit2 / (static_cast<double>(J) * n));
  K.residual_symmetric =
      res.x2 > 0.0 ? std::sqrt(res.sym2 / res.x2) : std::sqrt(res.sym2);
  if (!(K.residual_unitary <= kBogoliubovTolerance) ||
      !(K.residual_symmetric <= kBogoliubovTolerance)) {
    throw Error(ErrorCode::BogoliubovViolation,
                "Bogoliubov residuals " + std::to_string(K.residual_unitary) +
                    ", " + std::to_string(K.residual_symmetric) +
                    " exceed tolerance");
  }
  return K;
}

std::pair<CMatrix, CMatrix> polar_factors(const CMatrix& m) {
  // Left singular vectors and values from M M^dagger = U S^2 U^dagger.
  CMatrix mm = m * m.adjoint();
  const HermitianEigen e = hermitian_eigen(mm);
  const RVector s = e.values.cwiseMax(0.0).cwiseSqrt();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  if (s.size() && !(s.minCoeff() > 1e-12 * smax)) {
    throw Error(ErrorCode::SvdFailure,
                "polar decomposition of a singular matrix");
  }
  CMatrix h = e.vectors * s.asDiagonal() * e.vectors.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  CMatrix hinv = e.vectors * s.cwiseInverse().asDiagonal() * e.vectors.adjoint();
  return {std::move(h), hinv * m};
}

PolarParts polar_decompose(const SymplecticKernel& kernel) {
  PolarParts p;
  p.grid = kernel.grid;
  p.labels = kernel.labels;
  p.node_component = kernel.node_component;
  p.node_position = kernel.node_position;
  p.hermitian.reserve(kernel.components.size());
  p.unitary.reserve(kernel.components.size());
  for (const auto& c : kernel.components) {
    KernelComponent h, u;
    h.nodes = u.nodes = c.nodes;
    h.mirror_of = u.mirror_of = c.mirror_of;
    if (c.mirror_of < 0) {
      auto [mh, mu] = polar_factors(c.matrix);
      h.matrix = std::move(mh);
      u.matrix = std::move(mu);
    }
    p.hermitian.push_back(std::move(h));
    p.unitary.push_back(std::move(u));
  }
  return p;
}

int PolarParts::channel_index(const std::string& label) const {
  return label_index(labels, label);
}

CMatrix PolarParts::hermitian_block(ModeNode out, ModeNode in) const {
  return fetch_block(hermitian, *this, static_cast<int>(labels.size()),
                     grid.n_points, out, in);
}

CMatrix PolarParts::unitary_block(ModeNode out, ModeNode in) const {
  return fetch_block(unitary, *this, static_cast<int>(labels.size()),
                     grid.n_points, out, in);
}

CMatrix PolarParts::dense_hermitian() const {
  return assemble_dense(hermitian, *this, static_cast<int>(labels.size()),
                        grid.n_points);
}

CMatrix PolarParts::dense_unitary() const {
  return assemble_dense(unitary, *this, static_cast<int>(labels.size()),
                        grid.n_points);
}

JointSpectralAmplitude jsa_block(const PolarParts& parts,
                                 const std::string& mode_i,
                                 const std::string& mode_j) {
  const int i = parts.channel_index(mode_i);
  const int j = parts.channel_index(mode_j);
  const CMatrix b = parts.beta_h(i, j);
  JointSpectralAmplitude out;
  out.grid = parts.grid;
  out.row_label = mode_i;
  out.col_label = mode_j;
  out.partner = "(" + mode_j + "," + mode_i + ")";
  out.values = b / parts.grid.dk();
  if (b.norm() > kLowGainAdvisory) {
    out.advisory = "beta^h norm " + std::to_string(b.norm()) +
                   " exceeds the low-gain range";
  }
  return out;
}

}  // namespace ccg
