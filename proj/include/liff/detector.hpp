#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "liff/descriptor.hpp"
#include "liff/error.hpp"
#include "liff/feature.hpp"
#include "liff/focal_stack.hpp"
#include "liff/lightfield.hpp"
#include "liff/parallel.hpp"
#include "liff/params.hpp"
#include "liff/scale_space.hpp"

namespace liff {

/// Integer sample location in the scale-slope space. `octave` indexes
/// DoGPyramid::octaves, `level` the DoG level within it, `slope` the stack
/// slice.
struct RawDetection {
  int octave = 0;
  int level = 0;
  int slope = 0;
  int u = 0;
  int v = 0;

  auto operator<=>(const RawDetection&) const = default;
};

/// A keypoint after sub-sample refinement, before orientation.
struct RefinedKeypoint {
  RawDetection at;        // integer sample the fit converged on
  double du = 0.0;        // offsets from `at`, each below 1.5 in magnitude
  double dv = 0.0;
  double dlevel = 0.0;
  double dslope = 0.0;
  double response = 0.0;  // interpolated D, signed
};

namespace detail {

inline double dog_at(const ScaleSlopeSpace& space, int slope, int octave, int level,
                     int u, int v) {
  return space.per_slope[slope].octaves[octave].dogs[level](u, v);
}

inline bool geometry_matches(const ScaleSlopeSpace& space) {
  const auto& ref = space.per_slope.front();
  for (const auto& pyr : space.per_slope) {
    if (pyr.octaves.size() != ref.octaves.size()) return false;
    for (std::size_t k = 0; k < ref.octaves.size(); ++k)
      if (pyr.octaves[k].dogs.size() != ref.octaves[k].dogs.size() ||
          pyr.octaves[k].nu() != ref.octaves[k].nu() ||
          pyr.octaves[k].nv() != ref.octaves[k].nv())
        return false;
  }
  return true;
}

/// Strict extremum test against the 3x3x3(x3) neighbourhood. `slope_span` is
/// 1 for the joint search and 0 for a single slice.
inline bool is_strict_extremum(const ScaleSlopeSpace& space, const RawDetection& p,
                               double value, int slope_span) {
  const bool is_max = value > 0.0;
  for (int di = -slope_span; di <= slope_span; ++di)
    for (int dl = -1; dl <= 1; ++dl) {
      const Image& img = space.per_slope[p.slope + di].octaves[p.octave].dogs[p.level + dl];
      for (int du = -1; du <= 1; ++du) {
        const double* row = img.row(p.u + du).data();
        for (int dv = -1; dv <= 1; ++dv) {
          if (di == 0 && dl == 0 && du == 0 && dv == 0) continue;
          const double n = row[p.v + dv];
          if (is_max ? !(value > n) : !(value < n)) return false;
        }
      }
    }
  return true;
}

inline std::vector<RawDetection> scan_extrema(const ScaleSlopeSpace& space,
                                              double peak_threshold, bool joint,
                                              int workers) {
  const int M = space.num_slopes();
  const int num_octaves = static_cast<int>(space.per_slope.front().octaves.size());
  const int slope_lo = joint ? 1 : 0;
  const int slope_hi = joint ? M - 2 : M - 1;
  const int slope_count = slope_hi - slope_lo + 1;
  const double gate = 0.8 * peak_threshold;

  // One work unit per (octave, slope); results concatenate in unit order.
  const int units = num_octaves * std::max(slope_count, 0);
  std::vector<std::vector<RawDetection>> found(units);
  parallel_for(
      units,
      [&](int unit) {
        const int k = unit / slope_count;
        const int i = slope_lo + unit % slope_count;
        const Octave& oct = space.per_slope[i].octaves[k];
        const int levels = static_cast<int>(oct.dogs.size());
        for (int l = 1; l + 1 < levels; ++l) {
          const Image& img = oct.dogs[l];
          for (int u = 1; u + 1 < img.nu(); ++u) {
            const double* row = img.row(u).data();
            for (int v = 1; v + 1 < img.nv(); ++v) {
              const double x = row[v];
              if (!(std::abs(x) > gate)) continue;
              RawDetection p{k, l, i, u, v};
              if (is_strict_extremum(space, p, x, joint ? 1 : 0)) found[unit].push_back(p);
            }
          }
        }
      },
      workers);
  std::vector<RawDetection> out;
  for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
  return out;
}

}  // namespace detail

/// Samples that are strict extrema of D over their 80 neighbours in
/// (u, v, level, slope), lie strictly inside every axis, and exceed
/// 0.8 * peak_threshold in magnitude.
inline std::vector<RawDetection> find_extrema(const ScaleSlopeSpace& space,
                                              double peak_threshold,
                                              int workers = worker_count()) {
  require(space.num_slopes() >= 3, ErrorKind::invalid_parameter,
          "need-three-slopes: the joint search needs at least three slopes");
  require(detail::geometry_matches(space), ErrorKind::invalid_parameter,
          "pyramids in the scale-slope space differ in geometry");
  return detail::scan_extrema(space, peak_threshold, true, workers);
}

/// Classic 26-neighbour extrema of every slice on its own.
inline std::vector<RawDetection> find_extrema_per_slice(const ScaleSlopeSpace& space,
                                                        double peak_threshold,
                                                        int workers = worker_count()) {
  require(space.num_slopes() >= 1, ErrorKind::invalid_parameter,
          "scale-slope space is empty");
  return detail::scan_extrema(space, peak_threshold, false, workers);
}

namespace detail {

template <int Dim>
std::optional<RefinedKeypoint> refine_impl(const ScaleSlopeSpace& space,
                                           const RawDetection& raw,
                                           double peak_threshold) {
  static_assert(Dim == 3 || Dim == 4);
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  constexpr int kMaxIterations = 5;
  constexpr double kStepOffset = 0.6;
  constexpr double kMaxOffset = 1.5;

  const Octave& oct = space.per_slope[raw.slope].octaves[raw.octave];
  const std::array<int, 4> lo{1, 1, 1, 1};
  const std::array<int, 4> hi{oct.nu() - 2, oct.nv() - 2,
                              static_cast<int>(oct.dogs.size()) - 2,
                              space.num_slopes() - 2};
  std::array<int, 4> x{raw.u, raw.v, raw.level, raw.slope};
  auto sample = [&](std::array<int, 4> p) {
    return dog_at(space, p[3], raw.octave, p[2], p[0], p[1]);
  };
  auto shifted = [&](std::array<int, 4> p, int axis, int step) {
    p[axis] += step;
    return p;
  };

  Vec offset = Vec::Zero();
  Vec g = Vec::Zero();
  double centre = 0.0;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    centre = sample(x);
    Mat H;
    for (int a = 0; a < Dim; ++a) {
      const double plus = sample(shifted(x, a, 1));
      const double minus = sample(shifted(x, a, -1));
      g(a) = 0.5 * (plus - minus);
      H(a, a) = plus + minus - 2.0 * centre;
      for (int b = a + 1; b < Dim; ++b) {
        auto pp = shifted(shifted(x, a, 1), b, 1);
        auto pm = shifted(shifted(x, a, 1), b, -1);
        auto mp = shifted(shifted(x, a, -1), b, 1);
        auto mm = shifted(shifted(x, a, -1), b, -1);
        H(a, b) = H(b, a) = 0.25 * (sample(pp) - sample(pm) - sample(mp) + sample(mm));
      }
    }
    Eigen::FullPivLU<Mat> lu(H);
    if (!lu.isInvertible()) return std::nullopt;
    offset = -lu.solve(g);
    if (!offset.allFinite()) return std::nullopt;

    if (iter + 1 == kMaxIterations) break;
    bool moved = false;
    for (int a = 0; a < Dim; ++a) {
      if (offset(a) > kStepOffset && x[a] < hi[a]) {
        ++x[a];
        moved = true;
      } else if (offset(a) < -kStepOffset && x[a] > lo[a]) {
        --x[a];
        moved = true;
      }
    }
    if (!moved) break;
  }
  if ((offset.array().abs() >= kMaxOffset).any()) return std::nullopt;

  RefinedKeypoint kp;
  kp.at = {raw.octave, x[2], x[3], x[0], x[1]};
  kp.du = offset(0);
  kp.dv = offset(1);
  kp.dlevel = offset(2);
  if constexpr (Dim == 4) kp.dslope = offset(3);
  kp.response = centre + 0.5 * g.dot(offset);
  if (!(std::abs(kp.response) > peak_threshold)) return std::nullopt;
  return kp;
}

}  // namespace detail

/// Quadratic (second-order Taylor) refinement in (u, v, level, slope). The fit
/// re-centres on a neighbouring sample along every axis whose offset exceeds
/// 0.6, up to five fits; the last fit stands. Rejects fits that are singular,
/// offset by 1.5 samples or more, or whose refined |D| is at or below the peak
/// threshold.
inline std::optional<RefinedKeypoint> refine_feature(const ScaleSlopeSpace& space,
                                                     const RawDetection& raw,
                                                     double peak_threshold) {
  return detail::refine_impl<4>(space, raw, peak_threshold);
}

/// Same, holding the slope fixed (single-slice search).
inline std::optional<RefinedKeypoint> refine_feature_3d(const ScaleSlopeSpace& space,
                                                        const RawDetection& raw,
                                                        double peak_threshold) {
  return detail::refine_impl<3>(space, raw, peak_threshold);
}

/// Edge response test on the 2x2 spatial Hessian of D at the keypoint's own
/// level and slice. True means reject.
inline bool reject_edges(const ScaleSlopeSpace& space, const RawDetection& at,
                         double edge_threshold) {
  const Image& d = space.per_slope[at.slope].octaves[at.octave].dogs[at.level];
  const int u = at.u;
  const int v = at.v;
  const double c = d(u, v);
  const double duu = d(u + 1, v) + d(u - 1, v) - 2.0 * c;
  const double dvv = d(u, v + 1) + d(u, v - 1) - 2.0 * c;
  const double duv =
      0.25 * (d(u + 1, v + 1) - d(u + 1, v - 1) - d(u - 1, v + 1) + d(u - 1, v - 1));
  const double trace = duu + dvv;
  const double det = duu * dvv - duv * duv;
  if (det <= 0.0) return true;
  const double r = edge_threshold;
  return trace * trace / det >= (r + 1.0) * (r + 1.0) / r;
}

namespace orientation {
inline constexpr int kBins = 36;
inline constexpr double kWindowFactor = 1.5;
inline constexpr double kPeakRatio = 0.8;
inline constexpr int kSmoothingPasses = 6;
}  // namespace orientation

/// Dominant gradient orientations around a keypoint. Bin centres sit at
/// multiples of 10 degrees; every smoothed-histogram peak at or above 0.8 of
/// the maximum yields one orientation, refined by a parabola through the peak
/// and its neighbours.
inline std::vector<double> assign_orientation(const Image& img, const KeypointFrame& kp) {
  using namespace orientation;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  require(kp.u >= 0 && kp.v >= 0 && kp.u <= img.nu() - 1 && kp.v <= img.nv() - 1,
          ErrorKind::out_of_range, "keypoint outside the image");
  const double window_sigma = kWindowFactor * kp.sigma;
  const int radius = static_cast<int>(std::floor(3.0 * window_sigma));
  const int cu = static_cast<int>(std::lround(kp.u));
  const int cv = static_cast<int>(std::lround(kp.v));

  std::array<double, kBins> hist{};
  for (int pu = std::max(1, cu - radius); pu <= std::min(img.nu() - 2, cu + radius); ++pu)
    for (int pv = std::max(1, cv - radius); pv <= std::min(img.nv() - 2, cv + radius);
         ++pv) {
      const double du = pu - kp.u;
      const double dv = pv - kp.v;
      const double r2 = du * du + dv * dv;
      if (r2 >= radius * radius + 0.6) continue;
      const double gu = 0.5 * (img(pu + 1, pv) - img(pu - 1, pv));
      const double gv = 0.5 * (img(pu, pv + 1) - img(pu, pv - 1));
      const double mag = std::hypot(gu, gv);
      if (mag == 0.0) continue;
      const double weight = std::exp(-r2 / (2.0 * window_sigma * window_sigma));
      const double fbin = kBins * wrap_two_pi(std::atan2(gv, gu)) / two_pi;
      const int b = static_cast<int>(std::floor(fbin));
      const double rb = fbin - b;
      hist[b % kBins] += (1.0 - rb) * weight * mag;
      hist[(b + 1) % kBins] += rb * weight * mag;
    }

  for (int pass = 0; pass < kSmoothingPasses; ++pass) {
    std::array<double, kBins> prev = hist;
    for (int i = 0; i < kBins; ++i)
      hist[i] = (prev[(i + kBins - 1) % kBins] + prev[i] + prev[(i + 1) % kBins]) / 3.0;
  }

  const double peak = *std::max_element(hist.begin(), hist.end());
  if (peak <= 0.0) return {0.0};
  std::vector<double> thetas;
  for (int i = 0; i < kBins; ++i) {
    const double h0 = hist[i];
    const double hm = hist[(i + kBins - 1) % kBins];
    const double hp = hist[(i + 1) % kBins];
    if (!(h0 >= kPeakRatio * peak && h0 > hm && h0 > hp)) continue;
    const double denom = hp + hm - 2.0 * h0;
    const double di = denom != 0.0 ? -0.5 * (hp - hm) / denom : 0.0;
    double theta = two_pi * (i + di) / kBins;
    theta = wrap_two_pi(theta);
    // Keep the representation stable for angles a rounding error below 2 pi.
    if (two_pi - theta < 1e-12) theta = 0.0;
    thetas.push_back(theta);
  }
  if (thetas.empty()) thetas.push_back(0.0);
  return thetas;
}

/// Wall-clock seconds spent in each pipeline stage.
struct StageTimings {
  double focal_stack = 0.0;
  double dog = 0.0;
  double extrema = 0.0;
  double descriptors = 0.0;

  double total() const { return focal_stack + dog + extrema + descriptors; }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline double interpolate_slope(const std::vector<double>& slopes, double pos) {
  const int n = static_cast<int>(slopes.size());
  if (n == 1) return slopes.front();
  pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  const int i = std::min(static_cast<int>(std::floor(pos)), n - 2);
  const double f = pos - i;
  return (1.0 - f) * slopes[i] + f * slopes[i + 1];
}

/// Extrema, refinement, edge rejection, orientation and descriptors over an
/// already-built scale-slope space. `joint` selects the 4D search; otherwise
/// each slice is searched on its own with the slope held fixed.
inline std::vector<Feature> features_from_space(const ScaleSlopeSpace& space,
                                                const DetectorParams& params, bool joint,
                                                int workers, StageTimings* timings) {
  auto t0 = Clock::now();
  const auto raw = joint ? find_extrema(space, params.peak_threshold, workers)
                         : find_extrema_per_slice(space, params.peak_threshold, workers);

  std::vector<RefinedKeypoint> kept;
  std::set<RawDetection> seen;
  for (const auto& r : raw) {
    auto kp = joint ? refine_feature(space, r, params.peak_threshold)
                    : refine_feature_3d(space, r, params.peak_threshold);
    if (!kp) continue;
    if (reject_edges(space, kp->at, params.edge_threshold)) continue;
    // Two raw extrema can converge on the same sample; keep the first.
    if (!seen.insert(kp->at).second) continue;
    kept.push_back(*kp);
  }
  if (timings) timings->extrema += seconds_since(t0);

  t0 = Clock::now();
  const int S = space.per_slope.front().levels_per_octave;
  std::vector<std::vector<Feature>> per_kp(kept.size());
  parallel_for(
      static_cast<int>(kept.size()),
      [&](int idx) {
        const RefinedKeypoint& kp = kept[idx];
        const double slope_pos = kp.at.slope + kp.dslope;
        const int slice = std::clamp(static_cast<int>(std::lround(slope_pos)), 0,
                                     space.num_slopes() - 1);
        const DoGPyramid& pyr = space.per_slope[slice];
        const Octave& oct = pyr.octaves[kp.at.octave];
        const double level = kp.at.level + kp.dlevel;
        const int glevel = std::clamp(static_cast<int>(std::lround(level)), 0,
                                      static_cast<int>(oct.gaussians.size()) - 1);
        const Image& gauss = oct.gaussians[glevel];

        KeypointFrame frame;
        frame.u = std::clamp(kp.at.u + kp.du, 0.0, oct.nu() - 1.0);
        frame.v = std::clamp(kp.at.v + kp.dv, 0.0, oct.nv() - 1.0);
        frame.sigma = pyr.base_sigma * std::exp2(level / S);

        const double scale = oct.pixel_scale();
        for (double theta : assign_orientation(gauss, frame)) {
          frame.theta = theta;
          Feature f;
          f.u = frame.u * scale;
          f.v = frame.v * scale;
          f.sigma = pyr.sigma_at(oct.index, level);
          f.lambda = joint ? interpolate_slope(space.slopes, slope_pos)
                           : space.slopes[kp.at.slope];
          f.theta = theta;
          f.response = std::abs(kp.response);
          f.descriptor = normalize_rootsift(compute_descriptor(gauss, frame));
          per_kp[idx].push_back(f);
        }
      },
      workers);
  std::vector<Feature> out;
  for (auto& v : per_kp) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end(), feature_order);
  if (timings) timings->descriptors += seconds_since(t0);
  return out;
}

}  // namespace detail

/// LiFF: focal stack over the slope list, a DoG pyramid per slice, joint
/// extrema in (u, v, sigma, lambda), then SIFT-style refinement, edge
/// rejection, orientation and RootSIFT descriptors taken from the slice
/// nearest each feature's slope. A single-slope list degenerates to 2D
/// detection on that refocused image.
inline std::vector<Feature> detect(const LightField& lf, const DetectorParams& params,
                                   StageTimings* timings = nullptr,
                                   int workers = worker_count()) {
  params.validate();
  require(lf.is_grayscale(), ErrorKind::invalid_parameter,
          "detect requires a grayscale light field");
  auto slopes = params.slopes.empty() ? default_slopes(lf.dims()) : params.slopes;
  require(slopes.size() != 2, ErrorKind::invalid_parameter,
          "need-three-slopes: use one slope or at least three");

  auto t0 = detail::Clock::now();
  const FocalStack stack = build_focal_stack(lf, std::move(slopes), workers);
  if (timings) timings->focal_stack += detail::seconds_since(t0);

  t0 = detail::Clock::now();
  const ScaleSlopeSpace space = build_scale_slope_space(stack, params, workers);
  if (timings) timings->dog += detail::seconds_since(t0);

  return detail::features_from_space(space, params, stack.size() >= 3, workers, timings);
}

}  // namespace liff
