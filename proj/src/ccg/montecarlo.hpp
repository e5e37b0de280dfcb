#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccg/pipeline.hpp"
#include "ccg/settom.hpp"

namespace ccg {

struct EnsembleConfig {
  int n_samples = 1000;
  double g_max = 1e10;
  double delta_fb_max = 0.2;
  double delta_bf_max = 0.2;
  double c_max = 0.2;
  std::uint64_t seed = 20240917;
  bool independent_resonances = true;
  Engine engine = Engine::Full;
  int jobs = 1;
  bool set_study = false;
  int histogram_bins = 40;
  /// Keep each member's f-f JSA (memory: n^2 complex per sample).
  bool keep_jsas = false;
};

struct SampleRecord {
  int index = 0;
  RingDefectParams params;
  bool ok = false;
  std::string error;
  std::array<std::optional<LineshapeStats>, 3> lines;  // pump, signal, idler
  double purity = 0.0;
  double pair_probability = 0.0;
  std::optional<SetComparison> set;
};

struct Histogram {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> counts;
  int excluded = 0;
};

/// Histogram of `values` over [min, max] with `bins` equal bins.
Histogram make_histogram(const std::string& name,
                         const std::vector<double>& values, int bins);

struct EnsembleReport {
  EnsembleConfig config;
  double lambda = 0.0;
  std::vector<SampleRecord> samples;
  int failures = 0;
  int lineshape_failures = 0;
  double mean_purity = 0.0;
  double std_purity = 0.0;
  double mean_pair_probability = 0.0;
  double ensemble_purity = 0.0;
  int best = -1;
  int worst = -1;
  double mean_linewidth = 0.0;  // over all resonances with a dip
  std::array<double, 3> mean_linewidth_by_resonance{};
  double mean_set_fidelity = 0.0;
  double mean_purity_gap = 0.0;
  std::vector<Histogram> histograms;
  std::vector<JointSpectralAmplitude> jsas;  // only with keep_jsas
};

/// Per-resonance magnitudes uniform on [0, max), phases uniform on
/// [0, 2 pi). Each sample draws from its own mt19937_64 seeded by
/// seed_seq{seed_lo, seed_hi, index}, so results do not depend on jobs.
RingDefectParams sample_defects(const EnsembleConfig& config, int index);

/// Runs the f-f pipeline for every sample. `base` supplies geometry, grid
/// and the calibrated coupling; its defects are ignored.
EnsembleReport run_ensemble(const EnsembleConfig& config,
                            const ScenarioParams& base);

/// Evaluates a single sample as run_ensemble would.
SampleRecord evaluate_sample(const EnsembleConfig& config,
                             const ScenarioParams& base, int index,
                             JointSpectralAmplitude* jsa_out = nullptr);

/// SET comparison for one solved scenario on the forward bus modes.
SetComparison set_study(const ScenarioRun& run);

}  // namespace ccg
