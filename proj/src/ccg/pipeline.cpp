#include "ccg/pipeline.hpp"

#include <cmath>

#include "ccg/error.hpp"

namespace ccg {

const char* engine_name(Engine e) {
  return e == Engine::Full ? "full" : "perturbative";
}

Engine parse_engine(const std::string& name) {
  if (name == "full") return Engine::Full;
  if (name == "perturbative" || name == "fast") return Engine::Perturbative;
  throw Error(ErrorCode::Config, "unknown engine '" + name + "'");
}

ScenarioRun run_scenario(const FwmScenario& scenario, Engine engine) {
  ScenarioRun run;
  run.engine = engine;
  run.pumped = pump_scenario(scenario);
  run.filter = build_filter(run.pumped.signal_derived, scenario.params.grid);
  if (engine == Engine::Full) {
    run.kernel = solve_full_kernel(run.pumped.signal_derived, run.pumped.blocks);
    run.parts = polar_decompose(*run.kernel);
  }
  return run;
}

JointSpectralAmplitude ScenarioRun::jsa(const std::string& row,
                                        const std::string& col) const {
  if (parts) return jsa_block(*parts, row, col);
  return perturbative_jsa(filter, pumped.blocks, row, col);
}

CMatrix ScenarioRun::beta(const std::string& row, const std::string& col) const {
  const int i = pumped.signal_derived.channel_index(row);
  const int j = pumped.signal_derived.channel_index(col);
  if (kernel) return kernel->beta(i, j);
  return perturbative_beta(filter, pumped.blocks, i, j);
}

std::optional<SchmidtSpectrum> pair_metrics(const JointSpectralAmplitude& jsa) {
  if (!(jsa.values.cwiseAbs().maxCoeff() > 0.0)) return std::nullopt;
  return schmidt(jsa);
}

std::array<std::optional<LineshapeStats>, 3> resonance_lineshapes(
    const ScenarioParams& p) {
  const std::array<std::pair<int, const ResonanceDefects*>, 3> res{{
      {p.pump_channel, &p.defects.pump},
      {p.signal_channel, &p.defects.signal},
      {p.idler_channel, &p.defects.idler},
  }};
  std::array<std::optional<LineshapeStats>, 3> out;
  for (std::size_t r = 0; r < 3; ++r) {
    const CoupledCavityModel m =
        build_resonance_model(p.dispersion, p.geometry,
                              itu_wavelength_um(res[r].first), *res[r].second,
                              "r");
    const DerivedLinear d = derive_linear(m);
    const PumpSolution sol =
        solve_linear_tuned(d, top_hat(p.grid, d.channel_labels, "r1f", 1.0));
    out[r] = extract_lineshape_stats(sol.transmitted, d.channel_index("r1f"));
  }
  return out;
}

double baseline_pair_probability(const ScenarioParams& params, Engine engine,
                                 double lambda) {
  ScenarioParams p = params;
  p.defects = RingDefectParams{};
  p.coupling.lambda = lambda;
  const ScenarioRun run = run_scenario(build_fwm_scenario(p), engine);
  const auto m = pair_metrics(run.jsa("s1f", "i1f"));
  return m ? m->pair_probability : 0.0;
}

CalibrationResult calibrate_lambda(const ScenarioParams& params, Engine engine,
                                   double target, double tolerance) {
  CalibrationResult r;
  r.target = target;
  r.tolerance = tolerance;
  r.engine = engine;
  if (!(target >= 0.0) || !(tolerance > 0.0)) {
    throw Error(ErrorCode::Calibration, "invalid calibration target/tolerance");
  }
  if (target == 0.0) return r;

  // First-order pair probability is exactly quadratic in lambda.
  const double probe = 1e-2;
  const double p1 = baseline_pair_probability(params, Engine::Perturbative, probe);
  ++r.evaluations;
  if (!(p1 > 0.0)) {
    throw Error(ErrorCode::Calibration,
                "defect-free device produces no f-f pairs; cannot calibrate");
  }
  const double guess = probe * std::sqrt(target / p1);

  const auto eval = [&](double lam) {
    ++r.evaluations;
    return baseline_pair_probability(params, engine, lam) - target;
  };

  double lo = 0.0, flo = -target;
  double hi = guess, fhi = eval(hi);
  if (std::abs(fhi) <= tolerance) {
    r.lambda = hi;
    r.pair_probability = fhi + target;
    return r;
  }
  if (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    for (int grow = 0; grow < 40 && fhi < 0.0; ++grow) {
      hi *= 1.25;
      fhi = eval(hi);
    }
  } else {
    const double cand = 0.8 * guess;
    const double fc = eval(cand);
    if (fc < 0.0) {
      lo = cand;
      flo = fc;
    }
  }
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw Error(ErrorCode::Calibration, "could not bracket the target");
  }
  // Illinois-modified false position on the bracket.
  int side = 0;
  for (int it = 0; it < 100; ++it) {
    double mid = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double fm = eval(mid);
    if (std::abs(fm) <= tolerance) {
      r.lambda = mid;
      r.pair_probability = fm + target;
      return r;
    }
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  throw Error(ErrorCode::Calibration, "calibration did not converge");
}

}  // namespace ccg
