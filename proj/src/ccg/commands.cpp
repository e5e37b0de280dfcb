#include "ccg/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "ccg/error.hpp"
#include "ccg/pipeline.hpp"
#include "ccg/settom.hpp"

namespace fs = std::filesystem;

namespace ccg {

namespace {

struct BlockSpec {
  const char* name;
  const char* row;
  const char* col;
};

constexpr std::array<BlockSpec, 4> kBlocks{{{"ff", "s1f", "i1f"},
                                            {"bb", "s1b", "i1b"},
                                            {"fb", "s1f", "i1b"},
                                            {"bf", "s1b", "i1f"}}};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct BlockResult {
  bool present = false;
  double purity = kNaN;
  double pair_probability = 0.0;
  int rank = 0;
  std::optional<std::string> advisory;
  std::optional<JointSpectralAmplitude> jsa;
};

std::array<BlockResult, 4> block_results(const ScenarioRun& run, bool keep) {
  std::array<BlockResult, 4> out;
  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    JointSpectralAmplitude jsa = run.jsa(kBlocks[b].row, kBlocks[b].col);
    const auto s = pair_metrics(jsa);
    BlockResult& r = out[b];
    r.advisory = jsa.advisory;
    if (s) {
      r.present = true;
      r.purity = s->purity;
      r.pair_probability = s->pair_probability;
      r.rank = s->numerical_rank;
      if (keep) r.jsa = std::move(jsa);
    }
  }
  return out;
}

std::string opt_cell(bool present, double x) {
  return present ? format_double(x) : std::string();
}

json number_or_null(bool present, double x) {
  return present ? json(x) : json(nullptr);
}

template <typename F>
void parallel_for(int n, int jobs, F&& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  set_blas_threads(1);
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += jobs) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

int index_of(const std::vector<std::string>& labels, const std::string& l) {
  const auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) throw Error(ErrorCode::UnknownLabel, "unknown label " + l);
  return static_cast<int>(it - labels.begin());
}

class Context {
 public:
  std::string command;
  Engine engine = Engine::Full;
  std::uint64_t seed = EnsembleConfig{}.seed;
  int jobs = 1;
  ScenarioParams params;
  json config;  // resolved, re-runnable
  json calibration = json::object();
  fs::path out;
  json files = json::object();  // name -> column list
  json summary = json::object();

  fs::path artifact(const std::string& name, std::vector<std::string> columns) {
    files[name] = columns;
    return out / name;
  }

  void write_jsa(const std::string& stem, const JointSpectralAmplitude& jsa,
                 double v_row, double v_col) {
    write_jsa_csv(artifact("jsa_" + stem + ".csv", {"k", "k_prime", "re", "im"}),
                  jsa);
    write_jta_csv(artifact("jta_" + stem + ".csv", {"t", "t_prime", "re", "im"}),
                  jta(jsa, v_row, v_col));
  }
};

EnsembleConfig ensemble_config(Context& ctx) {
  EnsembleConfig ec = ensemble_from_json(ctx.config.value("ensemble", json::object()));
  ec.seed = ctx.seed;
  ec.engine = ctx.engine;
  ec.jobs = ctx.jobs;
  ctx.config["ensemble"] = ensemble_to_json(ec);
  return ec;
}

// scenario ------------------------------------------------------------------

void write_block_metrics(Context& ctx, const std::array<BlockResult, 4>& res,
                         const ScenarioRun& run) {
  CsvWriter w(ctx.artifact("metrics.csv",
                           {"block", "row", "col", "present", "purity",
                            "pair_probability", "schmidt_rank", "advisory"}),
              {"block", "row", "col", "present", "purity", "pair_probability",
               "schmidt_rank", "advisory"});
  json blocks = json::object();
  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    const BlockResult& r = res[b];
    w.row({kBlocks[b].name, kBlocks[b].row, kBlocks[b].col,
           r.present ? "1" : "0", opt_cell(r.present, r.purity),
           format_double(r.pair_probability),
           r.present ? std::to_string(r.rank) : std::string(),
           r.advisory.value_or("")});
    blocks[kBlocks[b].name] = {
        {"purity", number_or_null(r.present, r.purity)},
        {"pair_probability", r.pair_probability}};
  }
  ctx.summary["blocks"] = blocks;
  ctx.summary["gamma_sq_norm"] = run.pumped.blocks.drive_norm();
  if (res[0].present && res[0].pair_probability > 0.0) {
    // heralding efficiency proxy: f-b over f-f pair probability
    ctx.summary["fb_over_ff"] = res[2].pair_probability / res[0].pair_probability;
  }
}

void write_filters(Context& ctx, const PerturbFilter& f, const std::string& stem) {
  const std::array<std::pair<const char*, const char*>, 4> pairs{
      {{"s1f", "sf"}, {"s1b", "sb"}, {"i1f", "if"}, {"i1b", "ib"}}};
  for (const auto& [ch, cav] : pairs) {
    const int c = index_of(f.channel_labels, ch);
    const int n = index_of(f.cavity_labels, cav);
    write_series_csv(ctx.artifact("filter_" + stem + "_" + ch + "_" + cav + ".csv",
                                  {"k", "value"}),
                     f.grid, filter_marginals(f, c, n));
  }
}

void write_lineshapes(Context& ctx, const std::string& name,
                      const std::array<std::optional<LineshapeStats>, 3>& lines) {
  const std::vector<std::string> cols{"resonance", "linewidth", "center",
                                      "min_transmission", "plateau"};
  CsvWriter w(ctx.artifact(name, cols), cols);
  const std::array<const char*, 3> names{"pump", "signal", "idler"};
  json out = json::object();
  for (std::size_t r = 0; r < 3; ++r) {
    const auto& l = lines[r];
    w.row({names[r], opt_cell(l.has_value(), l ? l->linewidth : 0.0),
           opt_cell(l.has_value(), l ? l->center : 0.0),
           opt_cell(l.has_value(), l ? l->min_transmission : 0.0),
           opt_cell(l.has_value(), l ? l->plateau : 0.0)});
    out[names[r]] = number_or_null(l.has_value(), l ? l->linewidth : 0.0);
  }
  ctx.summary["linewidths"] = out;
}

void cmd_scenario(Context& ctx) {
  const FwmScenario sc = build_fwm_scenario(ctx.params);
  const ScenarioRun run = run_scenario(sc, ctx.engine);
  const auto res = block_results(run, true);
  write_block_metrics(ctx, res, run);
  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    if (res[b].jsa) {
      ctx.write_jsa(std::string("scenario_") + kBlocks[b].name, *res[b].jsa,
                    sc.v_signal, sc.v_idler);
    }
  }
  const auto& pump = run.pumped.pump;
  write_field_csv(ctx.artifact("pump_transmitted.csv", {"k", "mode", "re", "im"}),
                  pump.transmitted);
  write_field_csv(ctx.artifact("pump_intracavity.csv", {"k", "mode", "re", "im"}),
                  pump.intracavity);
  write_filters(ctx, run.filter, "scenario");
  write_lineshapes(ctx, "lineshapes.csv", resonance_lineshapes(ctx.params));
}

// sweep ---------------------------------------------------------------------

std::vector<json> sweep_values(const json& spec) {
  std::vector<json> out;
  if (spec.is_array()) {
    for (const auto& v : spec) out.push_back(v);
  } else if (spec.is_object() &&
             (spec.contains("linspace") || spec.contains("geomspace"))) {
    const bool geo = spec.contains("geomspace");
    const json& r = geo ? spec["geomspace"] : spec["linspace"];
    if (!r.is_array() || r.size() != 3) {
      throw Error(ErrorCode::Config, "range must be [start, stop, count]");
    }
    const double a = r[0].get<double>(), b = r[1].get<double>();
    const int n = r[2].get<int>();
    if (n < 1 || (geo && !(a > 0.0 && b > 0.0))) {
      throw Error(ErrorCode::Config, "bad sweep range");
    }
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(geo ? a * std::pow(b / a, t) : a + (b - a) * t);
    }
  } else {
    throw Error(ErrorCode::Config,
                "sweep.values must be a list or {linspace|geomspace: [a, b, n]}");
  }
  if (out.empty()) throw Error(ErrorCode::Config, "sweep has no values");
  return out;
}

void cmd_sweep(Context& ctx) {
  if (!ctx.config.contains("sweep")) throw Error(ErrorCode::Config, "missing sweep section");
  const json& sw = ctx.config["sweep"];
  const std::string path = sw.value("parameter", "");
  const std::vector<json> values = sweep_values(sw.value("values", json()));
  std::vector<int> flagged = sw.value("flag", std::vector<int>{});
  for (int f : flagged) {
    if (f < 0 || f >= static_cast<int>(values.size())) {
      throw Error(ErrorCode::Config, "sweep.flag index out of range");
    }
  }
  {
    ScenarioParams probe = ctx.params;
    set_parameter(probe, path, values.front());
  }

  struct Point {
    bool ok = false;
    std::string error;
    std::array<BlockResult, 4> blocks;
    double gamma_sq_norm = 0.0;
    std::optional<SpectralField> transmitted;
    double v_signal = 0.0, v_idler = 0.0;
  };
  std::vector<Point> points(values.size());
  parallel_for(static_cast<int>(values.size()), ctx.jobs, [&](int i) {
    Point& pt = points[static_cast<std::size_t>(i)];
    const bool keep =
        std::find(flagged.begin(), flagged.end(), i) != flagged.end();
    try {
      ScenarioParams p = ctx.params;
      set_parameter(p, path, values[static_cast<std::size_t>(i)]);
      const FwmScenario sc = build_fwm_scenario(p);
      const ScenarioRun run = run_scenario(sc, ctx.engine);
      pt.blocks = block_results(run, keep);
      pt.gamma_sq_norm = run.pumped.blocks.drive_norm();
      pt.v_signal = sc.v_signal;
      pt.v_idler = sc.v_idler;
      if (keep) pt.transmitted = run.pumped.pump.transmitted;
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });

  std::vector<std::string> cols{"index", "value_re", "value_im", "ok", "error"};
  for (const auto& b : kBlocks) {
    cols.push_back(std::string(b.name) + "_purity");
    cols.push_back(std::string(b.name) + "_pair_probability");
  }
  cols.push_back("gamma_sq_norm");
  CsvWriter w(ctx.artifact("metrics.csv", cols), cols);
  int failures = 0;
  json curve = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& pt = points[i];
    const cplx v = complex_from_json(values[i]);
    std::vector<std::string> row{std::to_string(i), format_double(v.real()),
                                 format_double(v.imag()), pt.ok ? "1" : "0",
                                 pt.error};
    json entry = {{"index", i}, {"value", complex_to_json(v)}, {"ok", pt.ok}};
    for (std::size_t b = 0; b < kBlocks.size(); ++b) {
      const BlockResult& r = pt.blocks[b];
      row.push_back(opt_cell(pt.ok && r.present, r.purity));
      row.push_back(opt_cell(pt.ok, r.pair_probability));
      entry[std::string(kBlocks[b].name) + "_purity"] =
          number_or_null(pt.ok && r.present, r.purity);
    }
    row.push_back(opt_cell(pt.ok, pt.gamma_sq_norm));
    w.row(row);
    curve.push_back(entry);
    if (!pt.ok) ++failures;
  }
  for (int f : flagged) {
    const Point& pt = points[static_cast<std::size_t>(f)];
    if (!pt.ok) continue;
    char idx[16];
    std::snprintf(idx, sizeof idx, "%03d", f);
    for (std::size_t b = 0; b < kBlocks.size(); ++b) {
      if (pt.blocks[b].jsa) {
        ctx.write_jsa(std::string("sweep_") + idx + "_" + kBlocks[b].name,
                      *pt.blocks[b].jsa, pt.v_signal, pt.v_idler);
      }
    }
    write_field_csv(ctx.artifact(std::string("pump_transmitted_sweep_") + idx + ".csv",
                                 {"k", "mode", "re", "im"}),
                    *pt.transmitted);
  }
  ctx.summary["parameter"] = path;
  ctx.summary["points"] = curve;
  ctx.summary["failures"] = failures;
}

// ensemble / set-study ------------------------------------------------------

struct Baseline {
  std::array<std::optional<LineshapeStats>, 3> lines;
  double purity = kNaN;
  double pair_probability = 0.0;
  std::optional<SetComparison> set;
};

Baseline run_baseline(const Context& ctx, bool with_set) {
  ScenarioParams p = ctx.params;
  p.defects = RingDefectParams{};
  Baseline b;
  b.lines = resonance_lineshapes(p);
  const ScenarioRun run = run_scenario(build_fwm_scenario(p), ctx.engine);
  const SchmidtSpectrum s = schmidt(run.jsa("s1f", "i1f"));
  b.purity = s.purity;
  b.pair_probability = s.pair_probability;
  if (with_set) b.set = set_study(run);
  return b;
}

double baseline_linewidth(const Baseline& b) {
  double sum = 0.0;
  int n = 0;
  for (const auto& l : b.lines) {
    if (l) {
      sum += l->linewidth;
      ++n;
    }
  }
  return n ? sum / n : kNaN;
}

void write_samples(Context& ctx, const EnsembleReport& rep) {
  std::vector<std::string> cols{"index", "ok", "error", "purity",
                                "pair_probability"};
  const std::array<const char*, 3> res{"pump", "signal", "idler"};
  for (const char* r : res) {
    cols.push_back(std::string(r) + "_linewidth");
    cols.push_back(std::string(r) + "_center");
  }
  for (const char* r : res) {
    for (const char* f : {"g", "delta_fb", "delta_bf", "c"}) {
      cols.push_back(std::string(r) + "_" + f + "_re");
      cols.push_back(std::string(r) + "_" + f + "_im");
    }
  }
  CsvWriter w(ctx.artifact("samples.csv", cols), cols);
  for (const auto& s : rep.samples) {
    std::vector<std::string> row{std::to_string(s.index), s.ok ? "1" : "0",
                                 s.error, opt_cell(s.ok, s.purity),
                                 opt_cell(s.ok, s.pair_probability)};
    for (const auto& l : s.lines) {
      row.push_back(opt_cell(l.has_value(), l ? l->linewidth : 0.0));
      row.push_back(opt_cell(l.has_value(), l ? l->center : 0.0));
    }
    for (const ResonanceDefects* d : {&s.params.pump, &s.params.signal, &s.params.idler}) {
      for (cplx z : {d->g, d->delta_fb, d->delta_bf, d->c}) {
        row.push_back(format_double(z.real()));
        row.push_back(format_double(z.imag()));
      }
    }
    w.row(row);
  }
}

void write_histograms(Context& ctx, const EnsembleReport& rep, const Baseline& base) {
  json hs = json::array();
  for (const auto& h : rep.histograms) {
    hs.push_back({{"name", h.name},
                  {"lo", h.lo},
                  {"hi", h.hi},
                  {"counts", h.counts},
                  {"excluded", h.excluded}});
  }
  json ref = {{"linewidth", baseline_linewidth(base)},
              {"purity", base.purity},
              {"pair_probability", base.pair_probability}};
  ctx.files["histograms.json"] = json::array();
  write_json_file(ctx.out / "histograms.json",
                  {{"histograms", hs}, {"baseline", ref}});
}

void cmd_ensemble(Context& ctx, bool set) {
  EnsembleConfig ec = ensemble_config(ctx);
  ec.set_study = ec.set_study || set;
  ctx.config["ensemble"]["set_study"] = ec.set_study;
  const EnsembleReport rep = run_ensemble(ec, ctx.params);
  const Baseline base = run_baseline(ctx, ec.set_study);
  write_samples(ctx, rep);
  write_histograms(ctx, rep, base);

  double max_p = kNaN, min_p = kNaN;
  if (rep.best >= 0) {
    max_p = rep.samples[static_cast<std::size_t>(rep.best)].purity;
    min_p = rep.samples[static_cast<std::size_t>(rep.worst)].purity;
  }
  const double base_lw = baseline_linewidth(base);
  std::vector<std::pair<std::string, double>> m{
      {"n_samples", ec.n_samples},
      {"failures", rep.failures},
      {"lineshape_failures", rep.lineshape_failures},
      {"mean_purity", rep.mean_purity},
      {"std_purity", rep.std_purity},
      {"mean_pair_probability", rep.mean_pair_probability},
      {"ensemble_purity", rep.ensemble_purity},
      {"max_purity", max_p},
      {"min_purity", min_p},
      {"best_index", rep.best},
      {"worst_index", rep.worst},
      {"mean_linewidth", rep.mean_linewidth},
      {"mean_linewidth_pump", rep.mean_linewidth_by_resonance[0]},
      {"mean_linewidth_signal", rep.mean_linewidth_by_resonance[1]},
      {"mean_linewidth_idler", rep.mean_linewidth_by_resonance[2]},
      {"baseline_linewidth", base_lw},
      {"linewidth_ratio", rep.mean_linewidth / base_lw},
      {"baseline_purity", base.purity},
      {"baseline_pair_probability", base.pair_probability}};
  if (ec.set_study) {
    m.emplace_back("mean_set_fidelity", rep.mean_set_fidelity);
    m.emplace_back("mean_purity_gap", rep.mean_purity_gap);
    m.emplace_back("baseline_set_fidelity", base.set ? base.set->fidelity : kNaN);
  }
  CsvWriter w(ctx.artifact("metrics.csv", {"metric", "value"}), {"metric", "value"});
  for (const auto& [k, v] : m) {
    w.row({k, format_double(v)});
    ctx.summary[k] = std::isfinite(v) ? json(v) : json(nullptr);
  }

  if (ec.set_study) {
    const std::vector<std::string> cols{"index", "ok", "fidelity", "true_purity",
                                        "inferred_purity", "purity_gap",
                                        "rank_deficient"};
    CsvWriter s(ctx.artifact("set.csv", cols), cols);
    for (const auto& r : rep.samples) {
      const bool ok = r.ok && r.set.has_value();
      s.row({std::to_string(r.index), ok ? "1" : "0",
             opt_cell(ok, ok ? r.set->fidelity : 0.0),
             opt_cell(ok, ok ? r.set->true_purity : 0.0),
             opt_cell(ok, ok ? r.set->inferred_purity : 0.0),
             opt_cell(ok, ok ? r.set->purity_gap : 0.0),
             ok ? (r.set->rank_deficient ? "1" : "0") : ""});
    }
  }

  // representative JSAs for the extreme members
  const FwmScenario sc = build_fwm_scenario(ctx.params);
  for (int idx : {rep.best, rep.worst}) {
    if (idx < 0) continue;
    JointSpectralAmplitude jsa;
    const SampleRecord r = evaluate_sample(ec, ctx.params, idx, &jsa);
    if (!r.ok) continue;
    char stem[32];
    std::snprintf(stem, sizeof stem, "ensemble_%04d_ff", idx);
    ctx.write_jsa(stem, jsa, sc.v_signal, sc.v_idler);
  }
}

// perturb-compare -----------------------------------------------------------

void cmd_perturb_compare(Context& ctx) {
  const json cmp = ctx.config.value("compare", json::object());
  struct Case {
    std::string name;
    int sample = -1;
    ScenarioParams params;
  };
  std::vector<Case> cases;
  if (cmp.contains("samples") || cmp.value("best_worst", false)) {
    EnsembleConfig ec = ensemble_config(ctx);
    std::vector<int> idx = cmp.value("samples", std::vector<int>{});
    if (cmp.value("best_worst", false)) {
      EnsembleConfig scan = ec;
      scan.engine = Engine::Perturbative;
      scan.set_study = false;
      const EnsembleReport rep = run_ensemble(scan, ctx.params);
      if (rep.best < 0) throw Error(ErrorCode::Config, "ensemble produced no members");
      idx.push_back(rep.best);
      idx.push_back(rep.worst);
      ctx.summary["best_index"] = rep.best;
      ctx.summary["worst_index"] = rep.worst;
    }
    for (int i : idx) {
      if (i < 0) throw Error(ErrorCode::Config, "negative sample index");
      Case c{"sample_" + std::to_string(i), i, ctx.params};
      c.params.defects = sample_defects(ec, i);
      cases.push_back(c);
    }
  } else {
    cases.push_back({"scenario", -1, ctx.params});
  }

  const std::vector<std::string> cols{
      "case", "sample", "block", "fidelity", "relative_deviation",
      "purity_full", "purity_perturbative", "pair_probability_full",
      "pair_probability_perturbative", "gamma_sq_norm"};
  CsvWriter w(ctx.artifact("metrics.csv", cols), cols);
  json out = json::array();
  for (const Case& c : cases) {
    const FwmScenario sc = build_fwm_scenario(c.params);
    const ScenarioRun full = run_scenario(sc, Engine::Full);
    const ScenarioRun pert = run_scenario(sc, Engine::Perturbative);
    const double drive = full.pumped.blocks.drive_norm();
    for (const auto& b : kBlocks) {
      const JointSpectralAmplitude jf = full.jsa(b.row, b.col);
      const JointSpectralAmplitude jp = pert.jsa(b.row, b.col);
      const auto sf = pair_metrics(jf);
      const auto sp = pair_metrics(jp);
      if (!sf || !sp) continue;
      const double fid = jsa_fidelity(jf, jp);
      const double dev = relative_frobenius(jp.values, jf.values);
      w.row({c.name, std::to_string(c.sample), b.name, format_double(fid),
             format_double(dev), format_double(sf->purity),
             format_double(sp->purity), format_double(sf->pair_probability),
             format_double(sp->pair_probability), format_double(drive)});
      out.push_back({{"case", c.name},
                     {"block", b.name},
                     {"fidelity", fid},
                     {"gamma_sq_norm", drive}});
      const std::string stem = c.name + "_" + b.name;
      write_jsa_csv(ctx.artifact("jsa_compare_full_" + stem + ".csv",
                                 {"k", "k_prime", "re", "im"}),
                    jf);
      write_jsa_csv(ctx.artifact("jsa_compare_perturbative_" + stem + ".csv",
                                 {"k", "k_prime", "re", "im"}),
                    jp);
    }
    write_filters(ctx, pert.filter, "compare_" + c.name);
  }
  ctx.summary["comparisons"] = out;
}

// calibrate -----------------------------------------------------------------

void cmd_calibrate(Context& ctx) {
  const json cal = ctx.config.value("calibration", json::object());
  const double target = cal.value("target", kBaselinePairProbability);
  const double tol = cal.value("tolerance", kCalibrationTolerance);
  ctx.config["calibration"] = {{"target", target}, {"tolerance", tol}};
  const CalibrationResult r = calibrate_lambda(ctx.params, ctx.engine, target, tol);
  const json record = {
      {"lambda", r.lambda},
      {"pump_amplitude", complex_to_json(ctx.params.coupling.pump_amplitude)},
      {"target", r.target},
      {"tolerance", r.tolerance},
      {"pair_probability", r.pair_probability},
      {"evaluations", r.evaluations},
      {"engine", engine_name(r.engine)},
      {"grid", scenario_to_json(ctx.params)["grid"]}};
  ctx.files["calibration.json"] = json::array();
  write_json_file(ctx.out / "calibration.json", record);
  CsvWriter w(ctx.artifact("metrics.csv", {"metric", "value"}), {"metric", "value"});
  w.row({"lambda", format_double(r.lambda)});
  w.row({"pair_probability", format_double(r.pair_probability)});
  w.row({"target", format_double(r.target)});
  w.row({"evaluations", std::to_string(r.evaluations)});
  ctx.calibration = {{"source", "computed"}, {"lambda", r.lambda}};
  ctx.summary = record;
}

// resolution ----------------------------------------------------------------

const std::array<const char*, 6> kCommands{
    "scenario", "sweep", "ensemble", "set-study", "perturb-compare", "calibrate"};

Context resolve(const RunRequest& req) {
  Context ctx;
  json cfg = req.config;
  if (!cfg.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  ctx.command = req.command;
  if (cfg.contains("manifest_version")) {
    if (ctx.command.empty()) ctx.command = cfg.value("command", "");
    cfg = cfg.value("config", json::object());
  }
  if (ctx.command.empty()) ctx.command = cfg.value("command", "");
  if (std::find_if(kCommands.begin(), kCommands.end(), [&](const char* c) {
        return ctx.command == c;
      }) == kCommands.end()) {
    throw Error(ErrorCode::Config, "unknown command '" + ctx.command + "'");
  }
  ctx.engine = parse_engine(req.engine.value_or(cfg.value("engine", "full")));
  if (req.seed) {
    ctx.seed = *req.seed;
  } else if (cfg.contains("seed")) {
    ctx.seed = cfg["seed"].get<std::uint64_t>();
  } else if (cfg.contains("ensemble") && cfg["ensemble"].contains("seed")) {
    ctx.seed = cfg["ensemble"]["seed"].get<std::uint64_t>();
  }
  ctx.jobs = std::max(1, req.jobs);
  if (req.jobs < 1) throw Error(ErrorCode::Config, "--jobs must be >= 1");

  const json scen = cfg.value("scenario", json::object());
  ctx.params = scenario_from_json(scen);
  if (req.grid_points || req.grid_half_span) {
    const KGrid& g = ctx.params.grid;
    const int n = req.grid_points.value_or(g.n_points);
    try {
      ctx.params.grid = req.grid_half_span ? KGrid::symmetric(n, *req.grid_half_span)
                                           : KGrid(n, g.k_min, g.k_max);
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, std::string("grid override: ") + e.what());
    }
  }

  const bool has_lambda = scen.contains("coupling") &&
                          scen["coupling"].contains("lambda") &&
                          !scen["coupling"]["lambda"].is_null();
  if (ctx.command != "calibrate") {
    if (has_lambda) {
      ctx.calibration = {{"source", "config"}, {"lambda", ctx.params.coupling.lambda}};
    } else if (cfg.contains("calibration_file")) {
      fs::path p = cfg["calibration_file"].get<std::string>();
      if (p.is_relative()) p = req.config_dir / p;
      const json rec = read_json_file(p);
      if (!rec.contains("lambda") || !rec["lambda"].is_number()) {
        throw Error(ErrorCode::Calibration, p.string() + " has no lambda");
      }
      ctx.params.coupling.lambda = rec["lambda"].get<double>();
      if (rec.contains("pump_amplitude")) {
        ctx.params.coupling.pump_amplitude = complex_from_json(rec["pump_amplitude"]);
      }
      ctx.calibration = {{"source", p.string()}, {"lambda", ctx.params.coupling.lambda}};
    } else {
      throw Error(ErrorCode::Calibration,
                  "no calibration: set scenario.coupling.lambda or "
                  "calibration_file (see the calibrate command)");
    }
  }
  cfg.erase("calibration_file");
  cfg["command"] = ctx.command;
  cfg["engine"] = engine_name(ctx.engine);
  cfg["seed"] = ctx.seed;
  cfg["scenario"] = scenario_to_json(ctx.params);
  ctx.config = cfg;
  ctx.out = req.out_dir;
  return ctx;
}

}  // namespace

json run_command(const RunRequest& req) {
  Context ctx = resolve(req);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + ctx.out.string());

  if (ctx.command == "scenario") {
    cmd_scenario(ctx);
  } else if (ctx.command == "sweep") {
    cmd_sweep(ctx);
  } else if (ctx.command == "ensemble") {
    cmd_ensemble(ctx, false);
  } else if (ctx.command == "set-study") {
    cmd_ensemble(ctx, true);
  } else if (ctx.command == "perturb-compare") {
    cmd_perturb_compare(ctx);
  } else {
    cmd_calibrate(ctx);
    ctx.config["scenario"]["coupling"]["lambda"] = ctx.summary["lambda"];
  }

  json manifest = {{"manifest_version", kManifestVersion},
                   {"code_version", kVersion},
                   {"command", ctx.command},
                   {"seed", ctx.seed},
                   {"engine", engine_name(ctx.engine)},
                   {"jobs", ctx.jobs},
                   {"lambda", ctx.params.coupling.lambda},
                   {"calibration", ctx.calibration},
                   {"config", ctx.config},
                   {"files", ctx.files},
                   {"summary", ctx.summary}};
  if (ctx.command == "calibrate") manifest["lambda"] = ctx.summary["lambda"];
  write_json_file(ctx.out / "manifest.json", manifest);
  return manifest;
}

}  // namespace ccg
