#include "ccg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "ccg/error.hpp"

namespace ccg {

RingDefectParams sample_defects(const EnsembleConfig& cfg, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](double max) {
    const double mag = max * unit(rng);
    const double ph = 2.0 * kPi * unit(rng);
    return std::polar(mag, ph);
  };
  const auto resonance = [&] {
    ResonanceDefects d;
    d.g = draw(cfg.g_max);
    d.delta_fb = draw(cfg.delta_fb_max);
    d.delta_bf = draw(cfg.delta_bf_max);
    d.c = draw(cfg.c_max);
    return d;
  };
  RingDefectParams p;
  p.pump = resonance();
  if (cfg.independent_resonances) {
    p.signal = resonance();
    p.idler = resonance();
  } else {
    p.signal = p.idler = p.pump;
  }
  return p;
}

SetComparison set_study(const ScenarioRun& run) {
  const SETDataset data =
      run.kernel ? simulate_set(*run.kernel, "s1f", "i1f")
                 : simulate_set_first_order(run.filter, run.pumped.blocks,
                                            "s1f", "i1f");
  return compare_set(reconstruct_standard(data), run.jsa("s1f", "i1f"));
}

SampleRecord evaluate_sample(const EnsembleConfig& cfg,
                             const ScenarioParams& base, int index,
                             JointSpectralAmplitude* jsa_out) {
  SampleRecord rec;
  rec.index = index;
  rec.params = sample_defects(cfg, index);
  ScenarioParams p = base;
  p.defects = rec.params;
  try {
    rec.lines = resonance_lineshapes(p);
    const ScenarioRun run = run_scenario(build_fwm_scenario(p), cfg.engine);
    JointSpectralAmplitude ff = run.jsa("s1f", "i1f");
    const SchmidtSpectrum s = schmidt(ff);
    rec.purity = s.purity;
    rec.pair_probability = s.pair_probability;
    if (cfg.set_study) rec.set = set_study(run);
    if (jsa_out) *jsa_out = std::move(ff);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

Histogram make_histogram(const std::string& name,
                         const std::vector<double>& values, int bins) {
  Histogram h;
  h.name = name;
  h.counts.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  if (values.empty()) return h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (double v : values) {
    if (!std::isfinite(v)) {
      ++h.excluded;
      continue;
    }
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.lo) / width) : 0;
    b = std::min(b, h.counts.size() - 1);
    ++h.counts[b];
  }
  return h;
}

EnsembleReport run_ensemble(const EnsembleConfig& cfg,
                            const ScenarioParams& base) {
  if (cfg.n_samples < 0 || cfg.g_max < 0.0 || cfg.delta_fb_max < 0.0 ||
      cfg.delta_bf_max < 0.0 || cfg.c_max < 0.0) {
    throw Error(ErrorCode::Config, "ensemble ranges and counts must be nonnegative");
  }
  set_blas_threads(1);
  EnsembleReport rep;
  rep.config = cfg;
  rep.lambda = base.coupling.lambda;
  rep.samples.resize(static_cast<std::size_t>(cfg.n_samples));

  const int jobs = std::max(1, cfg.jobs);
  const int chunk = 4 * jobs;
  HeraldedMixture mix(base.grid.n_points);
  std::vector<JointSpectralAmplitude> buffer(static_cast<std::size_t>(chunk));

  for (int start = 0; start < cfg.n_samples; start += chunk) {
    const int stop = std::min(cfg.n_samples, start + chunk);
    const auto work = [&](int w) {
      for (int i = start + w; i < stop; i += jobs) {
        rep.samples[static_cast<std::size_t>(i)] =
            evaluate_sample(cfg, base, i, &buffer[static_cast<std::size_t>(i - start)]);
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    // reduction in sample order keeps results independent of jobs
    for (int i = start; i < stop; ++i) {
      auto& jsa = buffer[static_cast<std::size_t>(i - start)];
      if (rep.samples[static_cast<std::size_t>(i)].ok) {
        mix.add(jsa.values);
        if (cfg.keep_jsas) rep.jsas.push_back(std::move(jsa));
      }
      jsa = JointSpectralAmplitude{};
    }
  }

  std::vector<double> purity, pairs, fid, gap;
  std::array<std::vector<double>, 3> widths, centers;
  for (const auto& s : rep.samples) {
    if (!s.ok) {
      ++rep.failures;
      continue;
    }
    purity.push_back(s.purity);
    pairs.push_back(s.pair_probability);
    for (std::size_t r = 0; r < 3; ++r) {
      if (s.lines[r]) {
        widths[r].push_back(s.lines[r]->linewidth);
        centers[r].push_back(s.lines[r]->center);
      } else {
        ++rep.lineshape_failures;
      }
    }
    if (s.set) {
      fid.push_back(s.set->fidelity);
      gap.push_back(s.set->purity_gap);
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0
                     : std::accumulate(v.begin(), v.end(), 0.0) /
                           static_cast<double>(v.size());
  };
  if (!purity.empty()) {
    rep.mean_purity = mean(purity);
    double var = 0.0;
    for (double p : purity) var += (p - rep.mean_purity) * (p - rep.mean_purity);
    rep.std_purity = purity.size() > 1
                         ? std::sqrt(var / static_cast<double>(purity.size() - 1))
                         : 0.0;
    rep.mean_pair_probability = mean(pairs);
    rep.ensemble_purity = mix.purity();
    double best = -1.0, worst = 2.0;
    for (const auto& s : rep.samples) {
      if (!s.ok) continue;
      if (s.purity > best) {
        best = s.purity;
        rep.best = s.index;
      }
      if (s.purity < worst) {
        worst = s.purity;
        rep.worst = s.index;
      }
    }
  }
  std::vector<double> all_widths, all_centers;
  for (std::size_t r = 0; r < 3; ++r) {
    rep.mean_linewidth_by_resonance[r] = mean(widths[r]);
    all_widths.insert(all_widths.end(), widths[r].begin(), widths[r].end());
    all_centers.insert(all_centers.end(), centers[r].begin(), centers[r].end());
  }
  rep.mean_linewidth = mean(all_widths);
  rep.mean_set_fidelity = mean(fid);
  rep.mean_purity_gap = mean(gap);

  const int bins = cfg.histogram_bins;
  rep.histograms.push_back(make_histogram("linewidth", all_widths, bins));
  rep.histograms.push_back(make_histogram("center", all_centers, bins));
  rep.histograms.push_back(make_histogram("purity", purity, bins));
  rep.histograms.push_back(make_histogram("pair_probability", pairs, bins));
  if (!fid.empty()) {
    rep.histograms.push_back(make_histogram("set_fidelity", fid, bins));
    rep.histograms.push_back(make_histogram("purity_gap", gap, bins));
  }
  return rep;
}

}  // namespace ccg
