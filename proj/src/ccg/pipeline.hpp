#pragma once

#include <array>
#include <optional>
#include <string>

#include "ccg/analysis.hpp"
#include "ccg/gaussdyn.hpp"
#include "ccg/perturb.hpp"
#include "ccg/ringscene.hpp"

namespace ccg {

enum class Engine { Full, Perturbative };

const char* engine_name(Engine e);
/// Throws Error(Config) for anything but "full" / "perturbative".
Engine parse_engine(const std::string& name);

/// One solved scenario; JSAs are read from the polar factors (full) or the
/// first-order filter (perturbative).
struct ScenarioRun {
  Engine engine = Engine::Full;
  PumpedScenario pumped;
  PerturbFilter filter;
  std::optional<SymplecticKernel> kernel;
  std::optional<PolarParts> parts;

  JointSpectralAmplitude jsa(const std::string& row,
                             const std::string& col) const;
  /// Raw (pre-polar) beta block in sample form.
  CMatrix beta(const std::string& row, const std::string& col) const;
};

ScenarioRun run_scenario(const FwmScenario& scenario, Engine engine);

/// Schmidt data of one block; nullopt when the block is identically zero.
std::optional<SchmidtSpectrum> pair_metrics(const JointSpectralAmplitude& jsa);

/// Bus transmission |t_{1f <- 1f}|^2 dip of the pump, signal and idler
/// resonances, each driven by a unit top-hat on its own grid.
std::array<std::optional<LineshapeStats>, 3> resonance_lineshapes(
    const ScenarioParams& params);

struct CalibrationResult {
  double lambda = 0.0;
  double pair_probability = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  int evaluations = 0;
  Engine engine = Engine::Full;
};

inline constexpr double kBaselinePairProbability = 0.01265;
inline constexpr double kCalibrationTolerance = 1e-5;

/// Solves for lambda so the defect-free f-f pair probability hits `target`
/// within `tolerance`, by a bracketing search seeded from the first-order
/// lambda^2 scaling. Throws Error(Calibration) when no bracket is found.
CalibrationResult calibrate_lambda(const ScenarioParams& params, Engine engine,
                                   double target = kBaselinePairProbability,
                                   double tolerance = kCalibrationTolerance);

/// f-f pair probability of the defect-free device at the given lambda.
double baseline_pair_probability(const ScenarioParams& params, Engine engine,
                                 double lambda);

}  // namespace ccg
