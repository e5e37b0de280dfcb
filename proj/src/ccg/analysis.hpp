#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccg/lingrid.hpp"

namespace ccg {

/// One beta^h block as a continuous kernel on grid x grid (values already
/// divided by dk, so sum |values|^2 dk^2 is the pair probability).
struct JointSpectralAmplitude {
  KGrid grid;
  std::string row_label;  // signal-side output mode
  std::string col_label;  // idler-side output mode
  CMatrix values;         // (k, k')
  /// Exchange partner: values(k, k') == partner(k', k).
  std::string partner;
  std::optional<std::string> advisory;

  double norm() const { return values.norm(); }
};

struct SchmidtSpectrum {
  RVector singular_values;  // descending, kernel units
  double purity = 0.0;
  double pair_probability = 0.0;
  int numerical_rank = 0;
};

/// Throws Error(ZeroNorm) for an all-zero JSA.
SchmidtSpectrum schmidt(const JointSpectralAmplitude& jsa);

/// sum s^4 / (sum s^2)^2 of a singular-value list. Throws Error(ZeroNorm).
double schmidt_purity(const RVector& singular_values);

struct JointTemporalAmplitude {
  RVector t_row;  // s
  RVector t_col;  // s
  CMatrix values;
  double display_half_window = 0.0;  // s
  int padding_factor = 3;
};

inline constexpr double kDisplayHalfWindow = 55.64e-12;

/// Zero-pads the JSA to 3n x 3n with the same dk and applies the centered
/// 2D transform
///   JTA(t, t') = (dw dw' / 2 pi) sum JSA(k, k') exp(-i (v k t + v' k' t'))
/// with w = v k and t spacing 2 pi / (3 n dw).
JointTemporalAmplitude jta(const JointSpectralAmplitude& jsa, double v_row,
                           double v_col);

/// Inverse of jta on the padded grid; returns the 3n x 3n padded JSA.
CMatrix inverse_jta(const JointTemporalAmplitude& t, const KGrid& grid,
                    double v_row, double v_col);

/// |<a,b>|^2 / (|a|^2 |b|^2). Throws Error(ZeroNorm) / Error(InvalidArgument).
double jsa_fidelity(const JointSpectralAmplitude& a,
                    const JointSpectralAmplitude& b);
double jsa_fidelity(const CMatrix& a, const CMatrix& b);

/// Running mixture of heralded signal states rho_m = B B^dagger / tr.
class HeraldedMixture {
 public:
  explicit HeraldedMixture(int dimension);
  /// Throws Error(ZeroNorm) for a zero member.
  void add(const CMatrix& jsa_values, double weight = 1.0);
  int count() const { return count_; }
  double total_weight() const { return weight_; }
  /// tr(rho^2) of the normalized mixture.
  double purity() const;

 private:
  CMatrix rho_;
  double weight_ = 0.0;
  int count_ = 0;
};

/// Purity of sum_m w_m rho_m. Empty weights mean equal weights.
double ensemble_purity(const std::vector<JointSpectralAmplitude>& jsas,
                       const std::vector<double>& weights = {});

}  // namespace ccg
