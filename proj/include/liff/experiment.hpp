#pragma once

// Monte-Carlo noise experiments: render a scene once, then for each noise
// level and peak threshold run the detectors over seeded noisy copies and
// score them against the ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "liff/baseline.hpp"
#include "liff/detector.hpp"
#include "liff/error.hpp"
#include "liff/synth.hpp"

namespace liff {

enum class DetectorKind { liff, sift, repeated_sift };

inline std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::liff: return "liff";
    case DetectorKind::sift: return "sift";
    case DetectorKind::repeated_sift: return "repeated-sift";
  }
  return "?";
}

inline DetectorKind detector_from_string(const std::string& name) {
  if (name == "liff") return DetectorKind::liff;
  if (name == "sift") return DetectorKind::sift;
  if (name == "repeated-sift") return DetectorKind::repeated_sift;
  fail(ErrorKind::invalid_parameter, "unknown detector '" + name + "'");
}

/// Runs one detector on a grayscale light field. SIFT sees the central view.
inline std::vector<Feature> run_detector(DetectorKind kind, const LightField& lf,
                                         const DetectorParams& params,
                                         const ConsolidationParams& cp = {},
                                         StageTimings* timings = nullptr,
                                         int workers = worker_count()) {
  switch (kind) {
    case DetectorKind::liff: return detect(lf, params, timings, workers);
    case DetectorKind::sift: return sift_detect(center_view(lf), params, timings, workers);
    case DetectorKind::repeated_sift:
      return repeated_sift(lf, params, cp, timings, workers);
  }
  return {};
}

struct TrialResult {
  DetectorKind detector = DetectorKind::liff;
  double variance = 0.0;
  double threshold = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  EvalReport report;
};

struct SweepConfig {
  std::vector<DetectorKind> detectors{DetectorKind::liff, DetectorKind::sift};
  std::vector<double> variances{1e-3};
  std::vector<double> thresholds{0.0066};
  int trials = 25;
  std::uint64_t seed = 1;
  DetectorParams params;           // peak_threshold is overridden by the sweep
  ConsolidationParams consolidation;
  double tol_px = 3.0;
  double tol_scale = 1.5;
};

/// Full grid of (variance, threshold, trial, detector). Trial t uses noise
/// seed trial_seed(seed, t) at every grid point, so detectors and thresholds
/// are compared on identical noise.
inline std::vector<TrialResult> run_sweep(
    const SyntheticScene& scene, const SweepConfig& cfg,
    const std::function<void(const TrialResult&)>& on_result = {}) {
  require(cfg.trials >= 1, ErrorKind::invalid_parameter, "trials must be positive");
  require(!cfg.detectors.empty() && !cfg.variances.empty() && !cfg.thresholds.empty(),
          ErrorKind::invalid_parameter, "sweep grid is empty");
  const LightField clean = render_lf(scene);
  std::vector<TrialResult> out;
  for (double variance : cfg.variances)
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(trial));
      const LightField noisy = add_noise(clean, variance, seed);
      for (double threshold : cfg.thresholds) {
        DetectorParams p = cfg.params;
        p.peak_threshold = threshold;
        for (DetectorKind kind : cfg.detectors) {
          TrialResult r;
          r.detector = kind;
          r.variance = variance;
          r.threshold = threshold;
          r.trial = trial;
          r.seed = seed;
          r.report = evaluate(run_detector(kind, noisy, p, cfg.consolidation), scene,
                              cfg.tol_px, cfg.tol_scale);
          if (on_result) on_result(r);
          out.push_back(std::move(r));
        }
      }
    }
  return out;
}

struct SweepMean {
  DetectorKind detector;
  double variance;
  double threshold;
  int trials = 0;
  double tp_rate = 0.0;
  double fp_count = 0.0;
  double slope_rmse = 0.0;  // mean over trials that have one
  int min_tp = 0;
  int max_fp = 0;
};

inline std::vector<SweepMean> summarize(const std::vector<TrialResult>& results) {
  std::map<std::tuple<int, double, double>, SweepMean> acc;
  std::map<std::tuple<int, double, double>, int> rmse_n;
  for (const auto& r : results) {
    const auto key = std::tuple(static_cast<int>(r.detector), r.variance, r.threshold);
    auto [it, fresh] = acc.try_emplace(key, SweepMean{r.detector, r.variance, r.threshold});
    SweepMean& m = it->second;
    if (fresh) {
      m.min_tp = r.report.tp_count;
      m.max_fp = r.report.fp_count;
    }
    ++m.trials;
    m.tp_rate += r.report.tp_rate;
    m.fp_count += r.report.fp_count;
    m.min_tp = std::min(m.min_tp, r.report.tp_count);
    m.max_fp = std::max(m.max_fp, r.report.fp_count);
    if (!std::isnan(r.report.slope_rmse)) {
      m.slope_rmse += r.report.slope_rmse;
      ++rmse_n[key];
    }
  }
  std::vector<SweepMean> out;
  for (auto& [key, m] : acc) {
    m.tp_rate /= m.trials;
    m.fp_count /= m.trials;
    const int n = rmse_n[key];
    m.slope_rmse = n > 0 ? m.slope_rmse / n : std::numeric_limits<double>::quiet_NaN();
    out.push_back(m);
  }
  return out;
}

}  // namespace liff
