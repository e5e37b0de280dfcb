#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccg/linalg.hpp"
#include "ccg/model.hpp"

namespace ccg {

/// Uniform wavenumber grid on [k_min, k_max] inclusive (m^-1).
struct KGrid {
  int n_points = 0;
  double k_min = 0.0;
  double k_max = 0.0;

  KGrid() = default;
  KGrid(int n, double lo, double hi);

  /// n points on (-half_span, half_span).
  static KGrid symmetric(int n, double half_span);
  /// 201 points on (-2515.01, 2515.01).
  static KGrid standard();

  double dk() const { return (k_max - k_min) / (n_points - 1); }
  double at(int i) const { return k_min + i * dk(); }
  RVector values() const;
  bool operator==(const KGrid& o) const {
    return n_points == o.n_points && k_min == o.k_min && k_max == o.k_max;
  }
};

inline constexpr double kStandardHalfSpan = 2515.01;
inline constexpr int kStandardPoints = 201;

/// Complex amplitudes indexed (mode, k).
struct SpectralField {
  KGrid grid;
  std::vector<std::string> labels;
  CMatrix amplitudes;  // rows: modes, cols: grid points

  int num_modes() const { return static_cast<int>(amplitudes.rows()); }
  int mode_index(const std::string& label) const;
};

/// Field of `labels.size()` modes, all zero except `label`, which carries
/// `amplitude` at every grid point.
SpectralField top_hat(const KGrid& grid, const std::vector<std::string>& labels,
                      const std::string& label, cplx amplitude);

struct PumpSolution {
  SpectralField input;
  SpectralField intracavity;
  SpectralField transmitted;
};

/// Per grid point k:
///   a(k)   = -i (-i k Vc + Gamma_bar)^-1 gamma_bar s-(k)
///   s+(k)  = T (s-(k) - i V^-1 gamma_bar^dagger a(k))
/// Throws Error(SingularSystem) if the resolvent is singular at some k.
PumpSolution solve_linear_tuned(const DerivedLinear& derived,
                                const SpectralField& input);

/// Linear input-output matrix s- -> s+ at wavenumber k (tuned system).
CMatrix linear_scattering_matrix(const DerivedLinear& derived, double k);

/// Linear solution sampled at absolute frequencies xi (rad/s). Each mode is
/// evaluated at its own wavenumber: (xi - Omega_j)/v_j for channels and
/// (xi - omega_n)/Vc_n for cavities.
struct AbsoluteFrequencySolution {
  RVector xi;
  RMatrix channel_k;     // J x n_xi
  RMatrix cavity_k;      // N x n_xi
  CMatrix input;         // J x n_xi, s-(k_j(xi))
  CMatrix intracavity;   // N x n_xi
  CMatrix transmitted;   // J x n_xi
};

/// Throws Error(OutOfSupport) when a requested xi maps outside the input
/// field's grid for a channel with nonzero input.
AbsoluteFrequencySolution solve_linear_absolute_frequency(
    const DerivedLinear& derived, const SpectralField& input,
    std::span<const double> frequency_samples);

/// Scattering matrix in flux-normalized amplitudes (s / sqrt(v)) at absolute
/// frequency xi; unitary for any passive model.
CMatrix absolute_frequency_scattering_matrix(const DerivedLinear& derived,
                                             double xi);

/// Linear interpolation of a sampled row onto `grid` for each channel, using
/// that channel's own k(xi). Points outside the samples are zero.
SpectralField resample_transmitted(const AbsoluteFrequencySolution& sol,
                                   const KGrid& grid,
                                   const std::vector<std::string>& labels);

/// One convolution entry: (a_p * a_q)((v_s k + v_i k' + detuning) / v_q).
struct ConvolutionSpec {
  int pump_a = 0;  // row in PumpSolution::intracavity
  int pump_b = 0;
  double v_signal = 0.0;
  double v_idler = 0.0;
  double v_pump_b = 0.0;
  double detuning = 0.0;  // m/s * m^-1 = rad/s
};

struct ConvolutionTable {
  KGrid grid;
  std::vector<ConvolutionSpec> specs;
  std::vector<CMatrix> entries;  // n x n each, indexed (k, k')
};

/// Direct discrete convolution (f * h)(q) = sum_m f(q_m) h(q - q_m) dk on the
/// (2n - 1)-point grid q = 2 k_min + m dk.
struct ConvolutionSeries {
  double q_min = 0.0;
  double dq = 0.0;
  CVector values;
  /// Linear interpolation; zero outside [q_min, q_max].
  cplx at(double q) const;
};

ConvolutionSeries convolve(const KGrid& grid, const CVector& f,
                           const CVector& h);

ConvolutionTable pump_convolutions(const PumpSolution& pump,
                                   const std::vector<ConvolutionSpec>& specs);

struct LineshapeStats {
  double linewidth = 0.0;  // m^-1, full width at half depth
  double center = 0.0;     // m^-1
  double min_transmission = 0.0;
  double plateau = 0.0;
};

/// Dip statistics of |t(k)|^2 for one channel. The plateau is the mean of
/// the outermost 5% of points on each side; the width is measured between
/// the first half-depth crossings on either side of the minimum, linearly
/// interpolated. Returns nullopt when no dip is found.
std::optional<LineshapeStats> extract_lineshape_stats(
    const SpectralField& transmitted, int channel);

}  // namespace ccg
