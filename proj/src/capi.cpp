#include "ccg/ccg.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <tuple>

#include "ccg/commands.hpp"
#include "ccg/error.hpp"
#include "ccg/io.hpp"
#include "ccg/pipeline.hpp"

struct ccg_model {
  ccg::CoupledCavityModel model;
  std::optional<ccg::DerivedLinear> derived;
};

struct ccg_scenario {
  ccg::ScenarioParams params;
  std::optional<ccg::ScenarioRun> run;
};

struct ccg_jsa {
  ccg::JointSpectralAmplitude jsa;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CCG_OK;
  } catch (const ccg::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const ccg::json::exception& e) {
    return fail(CCG_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CCG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CCG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CCG_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ccg::Error(ccg::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_matrix(const ccg::CMatrix& m, double* out, size_t capacity) {
  const size_t need = 2 * static_cast<size_t>(m.rows()) * static_cast<size_t>(m.cols());
  if (capacity < need) {
    throw ccg::Error(static_cast<ccg::ErrorCode>(CCG_ERR_BUFFER_TOO_SMALL),
                     "buffer needs " + std::to_string(need) + " doubles");
  }
  size_t p = 0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      out[p++] = m(r, c).real();
      out[p++] = m(r, c).imag();
    }
  }
}

const ccg::DerivedLinear& derived(ccg_model* m) {
  if (!m->derived) m->derived = ccg::derive_linear(m->model);
  return *m->derived;
}

}  // namespace

extern "C" {

const char* ccg_version(void) { return ccg::kVersion; }

const char* ccg_last_error(void) { return g_last_error.c_str(); }

void ccg_string_free(char* s) { std::free(s); }

int ccg_model_from_json(const char* json, ccg_model** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = nullptr;
    auto m = std::make_unique<ccg_model>();
    m->model = ccg::model_from_json(ccg::json::parse(json));
    const auto issues = ccg::validate_model(m->model);
    if (!issues.empty()) throw ccg::Error(ccg::ErrorCode::InvalidModel, issues.front());
    *out = m.release();
  });
}

void ccg_model_free(ccg_model* m) { delete m; }

int ccg_model_dims(const ccg_model* m, int* channels, int* cavities) {
  return guarded([&] {
    require(m, "null model");
    if (channels) *channels = m->model.num_channels();
    if (cavities) *cavities = m->model.num_cavities();
  });
}

int ccg_model_validate(const ccg_model* m, int require_tuned, char** issues_json) {
  return guarded([&] {
    require(m && issues_json, "null argument");
    *issues_json = dup_string(
        ccg::json(ccg::validate_model(m->model, require_tuned != 0)).dump());
  });
}

int ccg_model_transfer(const ccg_model* m, double* out, size_t capacity) {
  return guarded([&] {
    require(m && out, "null argument");
    copy_matrix(derived(const_cast<ccg_model*>(m)).T, out, capacity);
  });
}

int ccg_model_scattering(const ccg_model* m, double k, double* out,
                         size_t capacity) {
  return guarded([&] {
    require(m && out, "null argument");
    copy_matrix(ccg::linear_scattering_matrix(derived(const_cast<ccg_model*>(m)), k),
                out, capacity);
  });
}

int ccg_scenario_from_json(const char* json, ccg_scenario** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = nullptr;
    auto s = std::make_unique<ccg_scenario>();
    s->params = ccg::scenario_from_json(ccg::json::parse(json));
    *out = s.release();
  });
}

void ccg_scenario_free(ccg_scenario* s) { delete s; }

int ccg_scenario_solve(ccg_scenario* s, const char* engine) {
  return guarded([&] {
    require(s, "null scenario");
    const ccg::Engine e = ccg::parse_engine(engine ? engine : "full");
    s->run.reset();
    s->run = ccg::run_scenario(ccg::build_fwm_scenario(s->params), e);
  });
}

int ccg_scenario_jsa(const ccg_scenario* s, const char* row, const char* col,
                     ccg_jsa** out) {
  return guarded([&] {
    require(s && row && col && out, "null argument");
    require(s->run.has_value(), "scenario not solved");
    *out = nullptr;
    auto j = std::make_unique<ccg_jsa>();
    j->jsa = s->run->jsa(row, col);
    *out = j.release();
  });
}

int ccg_scenario_metrics(const ccg_scenario* s, char** json) {
  return guarded([&] {
    require(s && json, "null argument");
    require(s->run.has_value(), "scenario not solved");
    ccg::json out = ccg::json::object();
    for (const auto& [name, row, col] :
         {std::tuple{"ff", "s1f", "i1f"}, std::tuple{"bb", "s1b", "i1b"},
          std::tuple{"fb", "s1f", "i1b"}, std::tuple{"bf", "s1b", "i1f"}}) {
      const auto m = ccg::pair_metrics(s->run->jsa(row, col));
      out[name] = m ? ccg::json{{"purity", m->purity},
                                {"pair_probability", m->pair_probability}}
                    : ccg::json(nullptr);
    }
    out["engine"] = ccg::engine_name(s->run->engine);
    out["gamma_sq_norm"] = s->run->pumped.blocks.drive_norm();
    *json = dup_string(out.dump());
  });
}

void ccg_jsa_free(ccg_jsa* j) { delete j; }

int ccg_jsa_grid(const ccg_jsa* j, int* n, double* k_min, double* k_max) {
  return guarded([&] {
    require(j, "null jsa");
    if (n) *n = j->jsa.grid.n_points;
    if (k_min) *k_min = j->jsa.grid.k_min;
    if (k_max) *k_max = j->jsa.grid.k_max;
  });
}

int ccg_jsa_values(const ccg_jsa* j, double* out, size_t capacity) {
  return guarded([&] {
    require(j && out, "null argument");
    copy_matrix(j->jsa.values, out, capacity);
  });
}

int ccg_jsa_schmidt(const ccg_jsa* j, double* purity, double* pair_probability) {
  return guarded([&] {
    require(j, "null jsa");
    const ccg::SchmidtSpectrum s = ccg::schmidt(j->jsa);
    if (purity) *purity = s.purity;
    if (pair_probability) *pair_probability = s.pair_probability;
  });
}

int ccg_jsa_fidelity(const ccg_jsa* a, const ccg_jsa* b, double* fidelity) {
  return guarded([&] {
    require(a && b && fidelity, "null argument");
    *fidelity = ccg::jsa_fidelity(a->jsa, b->jsa);
  });
}

int ccg_jsa_from_values(int n, double k_min, double k_max, const double* values,
                        ccg_jsa** out) {
  return guarded([&] {
    require(values && out, "null argument");
    *out = nullptr;
    auto j = std::make_unique<ccg_jsa>();
    j->jsa.grid = ccg::KGrid(n, k_min, k_max);
    j->jsa.values.resize(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const size_t p = 2 * (static_cast<size_t>(r) * n + c);
        j->jsa.values(r, c) = {values[p], values[p + 1]};
      }
    }
    *out = j.release();
  });
}

int ccg_run(const char* request_json, char** manifest_json) {
  return guarded([&] {
    require(request_json, "null request");
    if (manifest_json) *manifest_json = nullptr;
    const ccg::json r = ccg::json::parse(request_json);
    ccg::RunRequest req;
    req.command = r.value("command", "");
    if (r.contains("config")) req.config = r["config"];
    req.config_dir = r.value("config_dir", ".");
    req.out_dir = r.value("out", "out");
    if (r.contains("seed") && !r["seed"].is_null()) req.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("grid_points") && !r["grid_points"].is_null()) {
      req.grid_points = r["grid_points"].get<int>();
    }
    if (r.contains("grid_span") && !r["grid_span"].is_null()) {
      req.grid_half_span = r["grid_span"].get<double>();
    }
    if (r.contains("engine") && !r["engine"].is_null()) {
      req.engine = r["engine"].get<std::string>();
    }
    req.jobs = r.value("jobs", 1);
    const ccg::json manifest = ccg::run_command(req);
    if (manifest_json) *manifest_json = dup_string(manifest.dump());
  });
}

}  // extern "C"
