#ifndef CCG_CCG_H
#define CCG_CCG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CCG_BUILDING_LIBRARY)
#    define CCG_API __declspec(dllexport)
#  else
#    define CCG_API __declspec(dllimport)
#  endif
#else
#  define CCG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; details via ccg_last_error. */
typedef enum ccg_status {
  CCG_OK = 0,
  CCG_ERR_INVALID_MODEL = 1,
  CCG_ERR_SINGULAR_SYSTEM = 2,
  CCG_ERR_BOGOLIUBOV = 3,
  CCG_ERR_OUT_OF_SUPPORT = 4,
  CCG_ERR_NO_DIP = 5,
  CCG_ERR_ZERO_NORM = 6,
  CCG_ERR_UNKNOWN_LABEL = 7,
  CCG_ERR_SVD = 8,
  CCG_ERR_INVALID_ARGUMENT = 9,
  CCG_ERR_CONFIG = 10,
  CCG_ERR_CALIBRATION = 11,
  CCG_ERR_IO = 12,
  CCG_ERR_BUFFER_TOO_SMALL = 13,
  CCG_ERR_INTERNAL = 99
} ccg_status;

typedef struct ccg_model ccg_model;
typedef struct ccg_scenario ccg_scenario;
typedef struct ccg_jsa ccg_jsa;

CCG_API const char* ccg_version(void);

/* Message of the last failed call on this thread; never NULL. */
CCG_API const char* ccg_last_error(void);

/* Frees strings returned through char** out-parameters. */
CCG_API void ccg_string_free(char* s);

/* ---- model ---------------------------------------------------------------
 * JSON: {"channels": [{label, carrier_frequency, group_velocity,
 *        direction, kind}], "cavities": [{label, resonance_frequency,
 *        group_velocity}], "gamma": N x J, "g": N x N, "C": J x J}
 * Complex entries are numbers or [re, im]. */
CCG_API int ccg_model_from_json(const char* json, ccg_model** out);
CCG_API void ccg_model_free(ccg_model* m);
CCG_API int ccg_model_dims(const ccg_model* m, int* channels, int* cavities);

/* JSON array of broken invariants ("[]" when valid). */
CCG_API int ccg_model_validate(const ccg_model* m, int require_tuned,
                               char** issues_json);

/* Channel-channel transfer T, J x J row-major interleaved (re, im). */
CCG_API int ccg_model_transfer(const ccg_model* m, double* out,
                               size_t capacity);

/* Tuned linear input-output matrix at wavenumber k, same layout. */
CCG_API int ccg_model_scattering(const ccg_model* m, double k, double* out,
                                 size_t capacity);

/* ---- ring scenario -------------------------------------------------------
 * Scenario JSON as in the CLI config "scenario" section. */
CCG_API int ccg_scenario_from_json(const char* json, ccg_scenario** out);
CCG_API void ccg_scenario_free(ccg_scenario* s);

/* engine: "full" or "perturbative". */
CCG_API int ccg_scenario_solve(ccg_scenario* s, const char* engine);

/* Requires a solved scenario. Row/col are output bus labels (s1f, i1b...). */
CCG_API int ccg_scenario_jsa(const ccg_scenario* s, const char* row,
                             const char* col, ccg_jsa** out);

/* Per-block purity and pair probability as JSON. */
CCG_API int ccg_scenario_metrics(const ccg_scenario* s, char** json);

/* ---- joint spectral amplitude ------------------------------------------ */
CCG_API void ccg_jsa_free(ccg_jsa* j);
CCG_API int ccg_jsa_grid(const ccg_jsa* j, int* n, double* k_min,
                         double* k_max);
/* n x n row-major interleaved (re, im), kernel units. */
CCG_API int ccg_jsa_values(const ccg_jsa* j, double* out, size_t capacity);
CCG_API int ccg_jsa_schmidt(const ccg_jsa* j, double* purity,
                            double* pair_probability);
CCG_API int ccg_jsa_fidelity(const ccg_jsa* a, const ccg_jsa* b,
                             double* fidelity);

/* Builds a JSA from raw values (for analysis of external data). */
CCG_API int ccg_jsa_from_values(int n, double k_min, double k_max,
                                const double* values, ccg_jsa** out);

/* ---- commands ------------------------------------------------------------
 * request: {"command", "config", "config_dir", "out", "seed",
 *           "grid_points", "grid_span", "engine", "jobs"}.
 * Writes the run's files and returns its manifest. */
CCG_API int ccg_run(const char* request_json, char** manifest_json);

#ifdef __cplusplus
}
#endif

#endif
