#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccg/analysis.hpp"
#include "ccg/lingrid.hpp"
#include "ccg/model.hpp"
#include "ccg/montecarlo.hpp"
#include "ccg/ringscene.hpp"

namespace ccg {

using json = nlohmann::json;

inline constexpr int kManifestVersion = 1;

/// Accepts a number, [re, im] or {"mag": m, "phase": p}.
cplx complex_from_json(const json& j);
json complex_to_json(cplx z);

/// {"channels": [...], "cavities": [...], "gamma": [[z, ...], ...], "g", "C"}.
/// Missing g or C default to zero. Throws Error(Config).
CoupledCavityModel model_from_json(const json& j);
json model_to_json(const CoupledCavityModel& model);

/// Fields absent from `j` keep the values of `base`.
ScenarioParams scenario_from_json(const json& j,
                                  const ScenarioParams& base = {});
json scenario_to_json(const ScenarioParams& params);

ResonanceDefects defects_from_json(const json& j);
json defects_to_json(const ResonanceDefects& d);
json defects_to_json(const RingDefectParams& d);

EnsembleConfig ensemble_from_json(const json& j,
                                  const EnsembleConfig& base = {});
json ensemble_to_json(const EnsembleConfig& c);

/// Sets one scalar by dotted path: defects.<pump|signal|idler>.<g|delta_fb|
/// delta_bf|c>, coupling.lambda, coupling.pump_amplitude, detuning,
/// geometry.self_coupling. Throws Error(Config) for an unknown path.
void set_parameter(ScenarioParams& params, const std::string& path,
                   const json& value);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Scientific, 17 significant digits (round-trips a double).
std::string format_double(double x);

/// Streams a CSV table. Throws Error(Io) if the file cannot be opened.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

// Columns: k, mode, re, im
void write_field_csv(const std::filesystem::path& path,
                     const SpectralField& field);
// Columns: k, k_prime, re, im
void write_jsa_csv(const std::filesystem::path& path,
                   const JointSpectralAmplitude& jsa);
// Columns: t, t_prime, re, im (display window only)
void write_jta_csv(const std::filesystem::path& path,
                   const JointTemporalAmplitude& jta);
// Columns: k, value
void write_series_csv(const std::filesystem::path& path, const KGrid& grid,
                      const RVector& values);

}  // namespace ccg
