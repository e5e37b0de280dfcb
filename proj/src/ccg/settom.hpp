#pragma once

#include <string>

#include "ccg/analysis.hpp"
#include "ccg/gaussdyn.hpp"
#include "ccg/perturb.hpp"

namespace ccg {

/// Conjugate-beam responses over the accessible bus modes, sample form:
///   d_signal^+ = beta12 d_idler^-*,  d_idler^+ = beta21 d_signal^-*
struct SETDataset {
  KGrid grid;
  std::string signal_label;
  std::string idler_label;
  CMatrix beta12;
  CMatrix beta21;
};

/// Throws Error(UnknownLabel).
SETDataset simulate_set(const SymplecticKernel& kernel,
                        const std::string& signal_bus,
                        const std::string& idler_bus);

/// Same data from the first-order (pre-polar) beta.
SETDataset simulate_set_first_order(const PerturbFilter& filter,
                                    const GammaBlocks& blocks,
                                    const std::string& signal_bus,
                                    const std::string& idler_bus);

struct SetReconstruction {
  JointSpectralAmplitude inferred;  // kernel units
  RVector singular_values;          // from beta12, sample form
  int rank12 = 0;
  int rank21 = 0;
  /// The two blocks have different numerical rank; the inferred JSA is
  /// restricted to the common support.
  bool rank_deficient = false;
};

/// beta12 = U1 D V2^dagger, beta21 = U2 D' V1^dagger, inferred
/// beta^h12 = U1 D U2^T. Throws Error(ZeroNorm) for an all-zero dataset.
SetReconstruction reconstruct_standard(const SETDataset& data);

struct SetComparison {
  double fidelity = 0.0;
  double true_purity = 0.0;
  double inferred_purity = 0.0;
  double purity_gap = 0.0;  // inferred - true
  bool rank_deficient = false;
};

SetComparison compare_set(const SetReconstruction& rec,
                          const JointSpectralAmplitude& truth);

inline constexpr double kPhaseTieTolerance = 1e-9;

/// Makes the largest-magnitude entry of every column of u real positive and
/// applies the same phases to the columns of v. Entries within
/// kPhaseTieTolerance of the maximum count as tied; the first one met wins,
/// scanning from index 0 or, with from_high_end, from the last index.
void fix_column_phases(CMatrix& u, CMatrix& v, bool from_high_end = false);

}  // namespace ccg
