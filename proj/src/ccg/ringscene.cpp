#include "ccg/ringscene.hpp"

#include <cmath>

#include "ccg/error.hpp"

namespace ccg {

double WaveguideDispersion::effective_index(double wl) const {
  double x = 1.0, n = 0.0;
  for (double c : coefficients) {
    n += c * x;
    x *= wl - center_um;
  }
  return n;
}

double WaveguideDispersion::index_slope(double wl) const {
  double x = 1.0, d = 0.0;
  for (std::size_t i = 1; i < coefficients.size(); ++i) {
    d += static_cast<double>(i) * coefficients[i] * x;
    x *= wl - center_um;
  }
  return d;
}

double WaveguideDispersion::group_velocity(double wl) const {
  const double ng = effective_index(wl) - wl * index_slope(wl);
  if (!(ng > 0.0)) {
    throw Error(ErrorCode::InvalidModel,
                "non-positive group index at " + std::to_string(wl) + " um");
  }
  return kSpeedOfLight / ng;
}

double RingGeometry::coupling_rate(double v) const {
  if (!(self_coupling > 0.0 && self_coupling < 1.0)) {
    throw Error(ErrorCode::InvalidModel,
                "self coupling must lie in (0, 1), got " +
                    std::to_string(self_coupling));
  }
  if (!(circumference > 0.0)) {
    throw Error(ErrorCode::InvalidModel, "ring circumference must be positive");
  }
  return std::sqrt(2.0 * (1.0 - self_coupling) * v * v / circumference);
}

double itu_wavelength_um(int channel) {
  const double f = 190.0e12 + 0.1e12 * channel;
  return kSpeedOfLight / f * 1e6;
}

double angular_frequency(double wavelength_um) {
  return 2.0 * kPi * kSpeedOfLight / (wavelength_um * 1e-6);
}

CoupledCavityModel build_resonance_model(const WaveguideDispersion& dispersion,
                                         const RingGeometry& geometry,
                                         double wavelength_um,
                                         const ResonanceDefects& d,
                                         const std::string& prefix) {
  const double v = dispersion.group_velocity(wavelength_um);
  const double w = angular_frequency(wavelength_um);
  const double gr = geometry.coupling_rate(v);

  CoupledCavityModel m;
  m.channels = {
      {prefix + "1f", w, v, Direction::Forward, ChannelKind::Bus},
      {prefix + "1b", w, v, Direction::Backward, ChannelKind::Bus},
      {prefix + "2f", w, v, Direction::Forward, ChannelKind::Phantom},
      {prefix + "2b", w, v, Direction::Backward, ChannelKind::Phantom},
  };
  m.cavities = {{prefix + "f", w, v}, {prefix + "b", w, v}};
  m.gamma.resize(2, 4);
  m.gamma << 1.0, d.delta_fb, 1.0, 0.0,
             d.delta_bf, 1.0, 0.0, 1.0;
  m.gamma *= gr;
  m.g = CMatrix::Zero(2, 2);
  m.g(0, 1) = d.g;
  m.g(1, 0) = std::conj(d.g);
  m.C = CMatrix::Zero(4, 4);
  m.C(0, 1) = v * d.c;
  m.C(1, 0) = v * std::conj(d.c);
  return m;
}

FwmScenario build_fwm_scenario(const ScenarioParams& p) {
  FwmScenario s;
  s.params = p;
  const double wp = itu_wavelength_um(p.pump_channel);
  const double ws = itu_wavelength_um(p.signal_channel);
  const double wi = itu_wavelength_um(p.idler_channel);
  s.pump_model =
      build_resonance_model(p.dispersion, p.geometry, wp, p.defects.pump, "p");
  s.signal_model = combine_models(
      build_resonance_model(p.dispersion, p.geometry, ws, p.defects.signal, "s"),
      build_resonance_model(p.dispersion, p.geometry, wi, p.defects.idler, "i"));
  s.v_pump = p.dispersion.group_velocity(wp);
  s.v_signal = p.dispersion.group_velocity(ws);
  s.v_idler = p.dispersion.group_velocity(wi);

  const int pf = s.pump_model.cavity_index("pf");
  const int pb = s.pump_model.cavity_index("pb");
  const int sf = s.signal_model.cavity_index("sf");
  const int sb = s.signal_model.cavity_index("sb");
  const int cf = s.signal_model.cavity_index("if");
  const int cb = s.signal_model.cavity_index("ib");

  // pair (p, p) drives (signal, idler); the exchanged entry drives (idler, signal)
  const auto add = [&](int pump, int sig, int idl) {
    const int e = static_cast<int>(s.convolutions.size());
    s.convolutions.push_back(
        {pump, pump, s.v_signal, s.v_idler, s.v_pump, p.detuning});
    s.convolutions.push_back(
        {pump, pump, s.v_idler, s.v_signal, s.v_pump, p.detuning});
    s.wiring.push_back({e, sig, idl, s.v_signal, 1.0});
    s.wiring.push_back({e + 1, idl, sig, s.v_idler, 1.0});
  };
  add(pf, sf, cf);
  add(pb, sb, cb);
  return s;
}

PumpedScenario pump_scenario(const FwmScenario& scenario) {
  PumpedScenario out;
  out.scenario = scenario;
  out.pump_derived = derive_linear(scenario.pump_model);
  out.signal_derived = derive_linear(scenario.signal_model);
  for (const auto* m : {&scenario.pump_model, &scenario.signal_model}) {
    const auto issues = validate_model(*m, true);
    if (!issues.empty()) {
      std::string msg = "tuned solver preconditions broken:";
      for (const auto& i : issues) msg += " " + i + ";";
      throw Error(ErrorCode::InvalidModel, msg);
    }
  }
  const KGrid& grid = scenario.params.grid;
  out.pump = solve_linear_tuned(
      out.pump_derived, top_hat(grid, out.pump_derived.channel_labels,
                                scenario.pump_input,
                                scenario.params.coupling.pump_amplitude));
  out.table = pump_convolutions(out.pump, scenario.convolutions);
  out.blocks = build_gamma_sq(out.table, scenario.params.coupling,
                              scenario.wiring, out.signal_derived.num_cavities());
  return out;
}

}  // namespace ccg
