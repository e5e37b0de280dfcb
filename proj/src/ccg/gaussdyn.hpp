#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ccg/analysis.hpp"
#include "ccg/lingrid.hpp"

namespace ccg {

struct NonlinearCoupling {
  double lambda = 0.0;           // effective FWM strength
  cplx pump_amplitude{1.0, 0.0};  // top-hat height of the pump input
};

/// Routes one convolution-table entry into Gamma_Sq(row, col):
///   Gamma_Sq(row, col)(k, k') += i/(2 pi) lambda velocity pump_ratio C(k, k')
struct SqWiring {
  int table_entry = 0;
  int row_cavity = 0;
  int col_cavity = 0;
  double velocity = 0.0;    // v of the row mode
  double pump_ratio = 1.0;  // v_p / v_p'
};

/// Sparse (cavity, cavity) -> n x n squeezing blocks in the doubled EOMs.
/// The phase-modulation block is housed but always empty.
struct GammaBlocks {
  KGrid grid;
  int num_cavities = 0;
  std::map<std::pair<int, int>, CMatrix> sq;
  std::map<std::pair<int, int>, CMatrix> pm;

  bool has(int row, int col) const { return sq.count({row, col}) != 0; }
  /// Zero matrix for an absent block.
  CMatrix block(int row, int col) const;
  /// sqrt(sum over blocks of |block|_F^2) dk, a rate (1/s).
  double drive_norm() const;
};

/// Throws Error(InvalidArgument) for wiring that points past the table.
GammaBlocks build_gamma_sq(const ConvolutionTable& table,
                           const NonlinearCoupling& coupling,
                           const std::vector<SqWiring>& wiring,
                           int num_cavities);

inline constexpr double kBogoliubovTolerance = 1e-6;

/// Doubled channel node: branch 0 annihilation, 1 creation.
struct ModeNode {
  int branch = 0;
  int channel = 0;
  bool operator==(const ModeNode& o) const {
    return branch == o.branch && channel == o.channel;
  }
};

/// Input-output matrix restricted to one connected set of doubled channel
/// nodes. Mirror components (branches swapped) are stored once and
/// recovered by complex conjugation.
struct KernelComponent {
  std::vector<ModeNode> nodes;
  CMatrix matrix;       // (|nodes| n) x (|nodes| n), sample form, empty if mirror
  int mirror_of = -1;   // index of the stored component, -1 if stored here
};

/// Discretized M(k, k') on the doubled (branch, channel, k) index space.
/// Block accessors return the sample-matrix form in which the Bogoliubov
/// identities hold without quadrature factors; the continuous kernel is
/// block / dk.
class SymplecticKernel {
 public:
  KGrid grid;
  std::vector<std::string> labels;
  std::vector<KernelComponent> components;
  double residual_unitary = 0.0;    // |a a^+ - b b^+ - 1|_F / |1|_F
  double residual_symmetric = 0.0;  // |a b^T - (a b^T)^T|_F / |a b^T|_F

  int num_channels() const { return static_cast<int>(labels.size()); }
  int channel_index(const std::string& label) const;

  /// n x n block from input node `in` to output node `out`.
  CMatrix block(ModeNode out, ModeNode in) const;
  CMatrix alpha(int i, int j) const { return block({0, i}, {0, j}); }
  CMatrix beta(int i, int j) const { return block({0, i}, {1, j}); }
  /// Full (2 J n)^2 matrix ordered (branch, channel, k).
  CMatrix dense() const;

  // component lookup, filled by the solver
  std::vector<int> node_component;  // by 2 J node id
  std::vector<int> node_position;   // position within the component
};

/// Assembles and solves the doubled EOMs on `grid`:
///   a rows : (-i Vc k) delta + Gamma_bar, + dk Gamma_Sq to a^dagger
///   a^+ rows: (+i Vc k) delta + Gamma_bar*, + dk Gamma_Sq* to a
/// then forms s+ = T (s- - i V^-1 gamma_bar^dagger a) and its conjugate.
/// Throws Error(SingularSystem) or Error(BogoliubovViolation).
SymplecticKernel solve_full_kernel(const DerivedLinear& derived,
                                   const GammaBlocks& blocks);

struct PolarParts {
  KGrid grid;
  std::vector<std::string> labels;
  std::vector<KernelComponent> hermitian;  // M_h by component
  std::vector<KernelComponent> unitary;    // M_u by component
  std::vector<int> node_component;
  std::vector<int> node_position;

  int channel_index(const std::string& label) const;
  CMatrix hermitian_block(ModeNode out, ModeNode in) const;
  CMatrix unitary_block(ModeNode out, ModeNode in) const;
  CMatrix beta_h(int i, int j) const {
    return hermitian_block({0, i}, {1, j});
  }
  CMatrix dense_hermitian() const;
  CMatrix dense_unitary() const;
};

/// M = U S W^dagger per component; M_h = U S U^dagger, M_u = U W^dagger.
/// U and S come from M M^dagger = U S^2 U^dagger (zheevr), so M_u =
/// M_h^-1 M. Throws Error(SvdFailure).
PolarParts polar_decompose(const SymplecticKernel& kernel);

/// Polar factors of a single dense matrix.
std::pair<CMatrix, CMatrix> polar_factors(const CMatrix& m);

inline constexpr double kLowGainAdvisory = 0.3;

/// (i, j) block of beta^h as a JSA in kernel units. Sets an advisory when
/// |beta^h|_F dk exceeds 0.3. Throws Error(UnknownLabel).
JointSpectralAmplitude jsa_block(const PolarParts& parts,
                                 const std::string& mode_i,
                                 const std::string& mode_j);

}  // namespace ccg
