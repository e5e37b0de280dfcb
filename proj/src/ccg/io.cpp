#include "ccg/io.hpp"

#include <cmath>
#include <cstdio>

#include "ccg/error.hpp"

namespace ccg {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::Config, what);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) config_error(std::string(what) + " must be a number");
  return j.get<double>();
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

CMatrix matrix_from_json(const json& j, int rows, int cols, const char* what) {
  CMatrix m = CMatrix::Zero(rows, cols);
  if (j.is_null()) return m;
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    config_error(std::string(what) + " must have " + std::to_string(rows) +
                 " rows");
  }
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      config_error(std::string(what) + " rows must have " +
                   std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[c]);
  }
  return m;
}

json matrix_to_json(const CMatrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

KGrid grid_from_json(const json& j, const KGrid& base) {
  int n = base.n_points;
  double lo = base.k_min, hi = base.k_max;
  read_opt(j, "points", n);
  if (j.contains("half_span")) {
    const double h = number(j["half_span"], "grid.half_span");
    lo = -h;
    hi = h;
  }
  read_opt(j, "k_min", lo);
  read_opt(j, "k_max", hi);
  try {
    return KGrid(n, lo, hi);
  } catch (const Error& e) {
    config_error(std::string("grid: ") + e.what());
  }
}

json grid_to_json(const KGrid& g) {
  return {{"points", g.n_points}, {"k_min", g.k_min}, {"k_max", g.k_max}};
}

// Re-throws malformed-JSON errors as Error(Config).
template <typename F>
auto config_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string(what) + ": " + e.what());
  }
}

}  // namespace

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  if (j.is_object() && j.contains("mag")) {
    const double m = number(j["mag"], "mag");
    const double p = j.contains("phase") ? number(j["phase"], "phase") : 0.0;
    return std::polar(m, p);
  }
  config_error("expected a number, [re, im] or {mag, phase}, got " + j.dump());
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

static CoupledCavityModel parse_model_from_json(const json& j) {
  if (!j.is_object()) config_error("model must be an object");
  CoupledCavityModel m;
  for (const json& c : j.value("channels", json::array())) {
    ChannelSpec s;
    s.label = c.value("label", "");
    s.carrier_frequency = c.value("carrier_frequency", 0.0);
    s.group_velocity = c.value("group_velocity", 0.0);
    const std::string dir = c.value("direction", "forward");
    if (dir == "forward") {
      s.direction = Direction::Forward;
    } else if (dir == "backward") {
      s.direction = Direction::Backward;
    } else {
      config_error("channel direction must be forward or backward");
    }
    const std::string kind = c.value("kind", "bus");
    if (kind == "bus") {
      s.kind = ChannelKind::Bus;
    } else if (kind == "phantom") {
      s.kind = ChannelKind::Phantom;
    } else {
      config_error("channel kind must be bus or phantom");
    }
    m.channels.push_back(s);
  }
  for (const json& c : j.value("cavities", json::array())) {
    CavitySpec s;
    s.label = c.value("label", "");
    s.resonance_frequency = c.value("resonance_frequency", 0.0);
    s.group_velocity = c.value("group_velocity", 0.0);
    m.cavities.push_back(s);
  }
  const int J = m.num_channels(), N = m.num_cavities();
  m.gamma = matrix_from_json(j.value("gamma", json()), N, J, "gamma");
  m.g = matrix_from_json(j.value("g", json()), N, N, "g");
  m.C = matrix_from_json(j.value("C", json()), J, J, "C");
  return m;
}

CoupledCavityModel model_from_json(const json& j) {
  return config_guard("model", [&] { return parse_model_from_json(j); });
}

json model_to_json(const CoupledCavityModel& m) {
  json chans = json::array(), cavs = json::array();
  for (const auto& c : m.channels) {
    chans.push_back(
        {{"label", c.label},
         {"carrier_frequency", c.carrier_frequency},
         {"group_velocity", c.group_velocity},
         {"direction", c.direction == Direction::Forward ? "forward" : "backward"},
         {"kind", c.kind == ChannelKind::Bus ? "bus" : "phantom"}});
  }
  for (const auto& c : m.cavities) {
    cavs.push_back({{"label", c.label},
                    {"resonance_frequency", c.resonance_frequency},
                    {"group_velocity", c.group_velocity}});
  }
  return {{"channels", chans},
          {"cavities", cavs},
          {"gamma", matrix_to_json(m.gamma)},
          {"g", matrix_to_json(m.g)},
          {"C", matrix_to_json(m.C)}};
}

static ResonanceDefects parse_defects_from_json(const json& j) {
  ResonanceDefects d;
  if (j.is_null()) return d;
  if (!j.is_object()) config_error("defects must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "g") {
      d.g = complex_from_json(*it);
    } else if (k == "delta_fb") {
      d.delta_fb = complex_from_json(*it);
    } else if (k == "delta_bf") {
      d.delta_bf = complex_from_json(*it);
    } else if (k == "c") {
      d.c = complex_from_json(*it);
    } else {
      config_error("unknown defect field '" + k + "'");
    }
  }
  return d;
}

ResonanceDefects defects_from_json(const json& j) {
  return config_guard("defects", [&] { return parse_defects_from_json(j); });
}

json defects_to_json(const ResonanceDefects& d) {
  return {{"g", complex_to_json(d.g)},
          {"delta_fb", complex_to_json(d.delta_fb)},
          {"delta_bf", complex_to_json(d.delta_bf)},
          {"c", complex_to_json(d.c)}};
}

json defects_to_json(const RingDefectParams& d) {
  return {{"pump", defects_to_json(d.pump)},
          {"signal", defects_to_json(d.signal)},
          {"idler", defects_to_json(d.idler)}};
}

static ScenarioParams parse_scenario_from_json(const json& j, const ScenarioParams& base) {
  if (!j.is_object()) config_error("scenario must be an object");
  ScenarioParams p = base;
  if (j.contains("grid")) p.grid = grid_from_json(j["grid"], p.grid);
  if (j.contains("dispersion")) {
    const json& d = j["dispersion"];
    read_opt(d, "coefficients", p.dispersion.coefficients);
    read_opt(d, "center_um", p.dispersion.center_um);
  }
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    read_opt(g, "circumference", p.geometry.circumference);
    read_opt(g, "self_coupling", p.geometry.self_coupling);
  }
  if (j.contains("channels")) {
    const json& c = j["channels"];
    read_opt(c, "pump", p.pump_channel);
    read_opt(c, "signal", p.signal_channel);
    read_opt(c, "idler", p.idler_channel);
  }
  if (j.contains("defects")) {
    const json& d = j["defects"];
    for (auto it = d.begin(); it != d.end(); ++it) {
      if (it.key() == "pump") {
        p.defects.pump = defects_from_json(*it);
      } else if (it.key() == "signal") {
        p.defects.signal = defects_from_json(*it);
      } else if (it.key() == "idler") {
        p.defects.idler = defects_from_json(*it);
      } else {
        config_error("unknown resonance '" + it.key() + "'");
      }
    }
  }
  if (j.contains("coupling")) {
    const json& c = j["coupling"];
    if (c.contains("lambda") && !c["lambda"].is_null()) {
      p.coupling.lambda = number(c["lambda"], "coupling.lambda");
    }
    if (c.contains("pump_amplitude")) {
      p.coupling.pump_amplitude = complex_from_json(c["pump_amplitude"]);
    }
  }
  if (j.contains("detuning")) p.detuning = number(j["detuning"], "detuning");
  return p;
}

ScenarioParams scenario_from_json(const json& j, const ScenarioParams& base) {
  return config_guard("scenario", [&] { return parse_scenario_from_json(j, base); });
}

json scenario_to_json(const ScenarioParams& p) {
  return {{"grid", grid_to_json(p.grid)},
          {"dispersion",
           {{"coefficients", p.dispersion.coefficients},
            {"center_um", p.dispersion.center_um}}},
          {"geometry",
           {{"circumference", p.geometry.circumference},
            {"self_coupling", p.geometry.self_coupling}}},
          {"channels",
           {{"pump", p.pump_channel},
            {"signal", p.signal_channel},
            {"idler", p.idler_channel}}},
          {"defects", defects_to_json(p.defects)},
          {"coupling",
           {{"lambda", p.coupling.lambda},
            {"pump_amplitude", complex_to_json(p.coupling.pump_amplitude)}}},
          {"detuning", p.detuning}};
}

static EnsembleConfig parse_ensemble_from_json(const json& j, const EnsembleConfig& base) {
  if (!j.is_object()) config_error("ensemble must be an object");
  EnsembleConfig c = base;
  read_opt(j, "n_samples", c.n_samples);
  read_opt(j, "g_max", c.g_max);
  read_opt(j, "delta_fb_max", c.delta_fb_max);
  read_opt(j, "delta_bf_max", c.delta_bf_max);
  read_opt(j, "c_max", c.c_max);
  read_opt(j, "seed", c.seed);
  read_opt(j, "independent_resonances", c.independent_resonances);
  read_opt(j, "histogram_bins", c.histogram_bins);
  read_opt(j, "set_study", c.set_study);
  if (c.n_samples < 1) config_error("ensemble.n_samples must be >= 1");
  if (c.histogram_bins < 1) config_error("ensemble.histogram_bins must be >= 1");
  return c;
}

EnsembleConfig ensemble_from_json(const json& j, const EnsembleConfig& base) {
  return config_guard("ensemble", [&] { return parse_ensemble_from_json(j, base); });
}

json ensemble_to_json(const EnsembleConfig& c) {
  return {{"n_samples", c.n_samples},
          {"g_max", c.g_max},
          {"delta_fb_max", c.delta_fb_max},
          {"delta_bf_max", c.delta_bf_max},
          {"c_max", c.c_max},
          {"seed", c.seed},
          {"independent_resonances", c.independent_resonances},
          {"histogram_bins", c.histogram_bins},
          {"set_study", c.set_study}};
}

void set_parameter(ScenarioParams& p, const std::string& path,
                   const json& value) {
  const std::string prefix = "defects.";
  if (path.rfind(prefix, 0) == 0) {
    const std::string rest = path.substr(prefix.size());
    const auto dot = rest.find('.');
    if (dot == std::string::npos) config_error("unknown parameter path " + path);
    const std::string res = rest.substr(0, dot), field = rest.substr(dot + 1);
    ResonanceDefects* d = nullptr;
    if (res == "pump") d = &p.defects.pump;
    if (res == "signal") d = &p.defects.signal;
    if (res == "idler") d = &p.defects.idler;
    if (d == nullptr) config_error("unknown parameter path " + path);
    const cplx z = complex_from_json(value);
    if (field == "g") {
      d->g = z;
    } else if (field == "delta_fb") {
      d->delta_fb = z;
    } else if (field == "delta_bf") {
      d->delta_bf = z;
    } else if (field == "c") {
      d->c = z;
    } else {
      config_error("unknown parameter path " + path);
    }
  } else if (path == "coupling.lambda") {
    p.coupling.lambda = number(value, path.c_str());
  } else if (path == "coupling.pump_amplitude") {
    p.coupling.pump_amplitude = complex_from_json(value);
  } else if (path == "detuning") {
    p.detuning = number(value, path.c_str());
  } else if (path == "geometry.self_coupling") {
    p.geometry.self_coupling = number(value, path.c_str());
  } else {
    config_error("unknown parameter path " + path);
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw Error(ErrorCode::InvalidArgument, "csv row has wrong column count");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void write_field_csv(const std::filesystem::path& path,
                     const SpectralField& field) {
  CsvWriter w(path, {"k", "mode", "re", "im"});
  for (int m = 0; m < field.num_modes(); ++m) {
    for (int i = 0; i < field.grid.n_points; ++i) {
      const cplx z = field.amplitudes(m, i);
      w.row({format_double(field.grid.at(i)), field.labels[m],
             format_double(z.real()), format_double(z.imag())});
    }
  }
}

void write_jsa_csv(const std::filesystem::path& path,
                   const JointSpectralAmplitude& jsa) {
  CsvWriter w(path, {"k", "k_prime", "re", "im"});
  const KGrid& g = jsa.grid;
  for (int i = 0; i < g.n_points; ++i) {
    for (int j = 0; j < g.n_points; ++j) {
      const cplx z = jsa.values(i, j);
      w.row({format_double(g.at(i)), format_double(g.at(j)),
             format_double(z.real()), format_double(z.imag())});
    }
  }
}

void write_jta_csv(const std::filesystem::path& path,
                   const JointTemporalAmplitude& t) {
  CsvWriter w(path, {"t", "t_prime", "re", "im"});
  const double h = t.display_half_window;
  for (int i = 0; i < t.t_row.size(); ++i) {
    if (std::abs(t.t_row[i]) > h) continue;
    for (int j = 0; j < t.t_col.size(); ++j) {
      if (std::abs(t.t_col[j]) > h) continue;
      const cplx z = t.values(i, j);
      w.row({format_double(t.t_row[i]), format_double(t.t_col[j]),
             format_double(z.real()), format_double(z.imag())});
    }
  }
}

void write_series_csv(const std::filesystem::path& path, const KGrid& grid,
                      const RVector& values) {
  CsvWriter w(path, {"k", "value"});
  for (int i = 0; i < grid.n_points; ++i) {
    w.row({format_double(grid.at(i)), format_double(values[i])});
  }
}

}  // namespace ccg
