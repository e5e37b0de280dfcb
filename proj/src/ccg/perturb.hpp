#pragma once

#include <string>
#include <vector>

#include "ccg/analysis.hpp"
#include "ccg/gaussdyn.hpp"

namespace ccg {

/// L(k) = T V^-1 gamma_bar^dagger (-i k Vc + Gamma_bar)^-1 per grid point
/// (J x N each); the filter is diagonal in (k, k').
struct PerturbFilter {
  KGrid grid;
  std::vector<std::string> channel_labels;
  std::vector<std::string> cavity_labels;
  RVector channel_velocity;
  std::vector<CMatrix> L;  // one per k
  std::vector<CMatrix> S;  // linear scattering matrix per k

  /// L_{channel, cavity}(k) across the grid.
  CVector row(int channel, int cavity) const;
};

PerturbFilter build_filter(const DerivedLinear& derived, const KGrid& grid);

/// First-order beta^h in sample form:
///   dk v_j sum_{n,m} L_in(k) Gamma_Sq_nm(k, k') L_jm(k')
CMatrix perturbative_beta_h(const PerturbFilter& filter,
                            const GammaBlocks& blocks, int i, int j);

/// First-order beta (before polar decomposition) in sample form:
///   beta_ij(k, k') = sum_l beta^h_il(k, k') conj(S_lj(k'))
CMatrix perturbative_beta(const PerturbFilter& filter,
                          const GammaBlocks& blocks, int i, int j);

/// Kernel-unit JSA of the first-order beta^h block. Throws Error(UnknownLabel).
JointSpectralAmplitude perturbative_jsa(const PerturbFilter& filter,
                                        const GammaBlocks& blocks,
                                        const std::string& mode_i,
                                        const std::string& mode_j);

JointSpectralAmplitude perturbative_jsa(const DerivedLinear& derived,
                                        const GammaBlocks& blocks,
                                        const std::string& mode_i,
                                        const std::string& mode_j);

/// |integral dk' L(k, k')| = |L_{channel, cavity}(k)|.
RVector filter_marginals(const PerturbFilter& filter, int channel, int cavity);

}  // namespace ccg
