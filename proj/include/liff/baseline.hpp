#pragma once

// Central-view SIFT and repeated SIFT with cross-view consolidation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "liff/detector.hpp"
#include "liff/error.hpp"
#include "liff/feature.hpp"
#include "liff/lightfield.hpp"
#include "liff/parallel.hpp"
#include "liff/params.hpp"
#include "liff/scale_space.hpp"

namespace liff {

/// 2D SIFT on one image, sharing the LiFF pyramid, refinement, orientation
/// and descriptor code. Features carry no slope.
inline std::vector<Feature> sift_detect(const Image& img, const DetectorParams& params,
                                        StageTimings* timings = nullptr,
                                        int workers = worker_count()) {
  params.validate();
  auto t0 = detail::Clock::now();
  ScaleSlopeSpace space;
  space.slopes = {std::numeric_limits<double>::quiet_NaN()};
  space.per_slope.push_back(build_dog_pyramid(img, params));
  if (timings) timings->dog += detail::seconds_since(t0);
  return detail::features_from_space(space, params, false, workers, timings);
}

/// Acceptance criteria used when consolidating detections across views.
/// The values are permissive stand-ins; nothing canonical exists.
struct ConsolidationParams {
  double agreement = 0.25;               // fraction of views that must agree
  double max_scale_ratio = 1.25;
  double max_orientation_diff_deg = 20.0;
  double max_descriptor_distance = 0.35;
  double max_plane_residual = 1.0;       // pixels

  void validate() const {
    require(agreement > 0.0 && agreement <= 1.0, ErrorKind::invalid_parameter,
            "agreement must lie in (0, 1]");
    require(max_scale_ratio >= 1.0 && max_orientation_diff_deg >= 0.0 &&
                max_descriptor_distance >= 0.0 && max_plane_residual >= 0.0,
            ErrorKind::invalid_parameter, "invalid consolidation thresholds");
  }
};

/// Slope plane through a set of observations: u = cu - slope*s', v = cv - slope*t'.
struct SlopePlane {
  double cu = 0.0;
  double cv = 0.0;
  double slope = 0.0;

  double residual(double u, double v, int s, int t) const {
    return std::hypot(u - (cu - slope * s), v - (cv - slope * t));
  }
};

struct PlaneObservation {
  double u;
  double v;
  int s;  // view offset from the centre
  int t;
};

/// Least-squares slope plane. With no parallax among the observations the
/// slope is zero and the offsets are the mean positions.
inline SlopePlane fit_slope_plane(const std::vector<PlaneObservation>& obs) {
  require(!obs.empty(), ErrorKind::invalid_parameter, "no observations to fit");
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  double mu = 0.0, mv = 0.0, parallax = 0.0;
  for (const auto& o : obs) {
    // unknowns (cu, cv, slope)
    const Eigen::Vector3d ru(1.0, 0.0, -o.s);
    const Eigen::Vector3d rv(0.0, 1.0, -o.t);
    ata += ru * ru.transpose() + rv * rv.transpose();
    atb += ru * o.u + rv * o.v;
    mu += o.u;
    mv += o.v;
    parallax += o.s * o.s + o.t * o.t;
  }
  const double n = static_cast<double>(obs.size());
  if (parallax == 0.0) return {mu / n, mv / n, 0.0};
  const Eigen::Vector3d x = ata.ldlt().solve(atb);
  return {x(0), x(1), x(2)};
}

namespace detail {

inline double angle_diff(double a, double b) {
  const double d = wrap_two_pi(a - b);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

/// Features of one view sorted by u for range queries.
struct ViewIndex {
  int s = 0;
  int t = 0;
  std::vector<Feature> features;

  void sort() {
    std::sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
      return std::tie(a.u, a.v, a.sigma, a.theta) < std::tie(b.u, b.v, b.sigma, b.theta);
    });
  }
};

}  // namespace detail

/// Consolidates per-view SIFT detections. Each central-view feature searches
/// every other view for detections compatible in scale, orientation and
/// descriptor that lie on a common slope plane; it survives when the views
/// agreeing with the best plane (the central one included) make up at least
/// `agreement` of all views. Surviving features report the fitted slope.
inline std::vector<Feature> consolidate_views(const std::vector<detail::ViewIndex>& views,
                                              int central, const ConsolidationParams& cp,
                                              double max_abs_slope) {
  cp.validate();
  const double orient_tol = cp.max_orientation_diff_deg * std::numbers::pi / 180.0;
  const int total_views = static_cast<int>(views.size());
  std::vector<Feature> out;

  // Orientation copies of one keypoint are consolidated together and share
  // the fitted slope.
  const auto& central_features = views[central].features;
  for (std::size_t first = 0; first < central_features.size();) {
    const Feature& f = central_features[first];
    std::size_t last = first + 1;
    while (last < central_features.size() && central_features[last].u == f.u &&
           central_features[last].v == f.v && central_features[last].sigma == f.sigma)
      ++last;
    const std::span<const Feature> group(central_features.data() + first, last - first);
    first = last;

    struct Candidate {
      int view;
      double u, v;
    };
    std::vector<Candidate> cands;
    for (int w = 0; w < total_views; ++w) {
      if (w == central) continue;
      const auto& vw = views[w];
      const double reach_u = max_abs_slope * std::abs(vw.s) + cp.max_plane_residual;
      const double reach_v = max_abs_slope * std::abs(vw.t) + cp.max_plane_residual;
      auto it = std::lower_bound(
          vw.features.begin(), vw.features.end(), f.u - reach_u,
          [](const Feature& g, double key) { return g.u < key; });
      for (; it != vw.features.end() && it->u <= f.u + reach_u; ++it) {
        const Feature& g = *it;
        if (std::abs(g.v - f.v) > reach_v) continue;
        const double ratio = std::max(g.sigma / f.sigma, f.sigma / g.sigma);
        if (ratio > cp.max_scale_ratio) continue;
        const bool similar = std::any_of(group.begin(), group.end(), [&](const Feature& h) {
          return detail::angle_diff(g.theta, h.theta) <= orient_tol &&
                 descriptor_distance(g.descriptor, h.descriptor) <= cp.max_descriptor_distance;
        });
        if (similar) cands.push_back({w, g.u, g.v});
      }
    }

    // Best plane hypothesis: for each view keep the candidate closest to the
    // plane, count views within the residual bound.
    auto inliers_for = [&](const SlopePlane& plane) {
      std::vector<int> best(total_views, -1);
      std::vector<double> best_r(total_views, std::numeric_limits<double>::infinity());
      for (int c = 0; c < static_cast<int>(cands.size()); ++c) {
        const auto& vw = views[cands[c].view];
        const double r = plane.residual(cands[c].u, cands[c].v, vw.s, vw.t);
        if (r <= cp.max_plane_residual && r < best_r[cands[c].view]) {
          best[cands[c].view] = c;
          best_r[cands[c].view] = r;
        }
      }
      std::vector<int> chosen;
      double sum_r = 0.0;
      for (int w = 0; w < total_views; ++w)
        if (best[w] >= 0) {
          chosen.push_back(best[w]);
          sum_r += best_r[w];
        }
      return std::pair(chosen, sum_r);
    };

    SlopePlane plane{f.u, f.v, 0.0};
    auto [chosen, score] = inliers_for(plane);
    for (const auto& c : cands) {
      const auto& vw = views[c.view];
      const double n2 = vw.s * vw.s + vw.t * vw.t;
      const SlopePlane hyp{f.u, f.v, -((c.u - f.u) * vw.s + (c.v - f.v) * vw.t) / n2};
      auto [ch, sc] = inliers_for(hyp);
      if (ch.size() > chosen.size() || (ch.size() == chosen.size() && sc < score)) {
        chosen = std::move(ch);
        score = sc;
        plane = hyp;
      }
    }
    // Refit on the inliers (central observation included), then recount.
    for (int pass = 0; pass < 2 && !chosen.empty(); ++pass) {
      std::vector<PlaneObservation> obs{{f.u, f.v, views[central].s, views[central].t}};
      for (int c : chosen) obs.push_back({cands[c].u, cands[c].v, views[cands[c].view].s,
                                          views[cands[c].view].t});
      plane = fit_slope_plane(obs);
      chosen = inliers_for(plane).first;
    }

    const int agreeing = 1 + static_cast<int>(chosen.size());
    if (agreeing < cp.agreement * total_views - 1e-9) continue;
    for (Feature kept : group) {
      kept.lambda = chosen.empty() ? 0.0 : plane.slope;
      out.push_back(kept);
    }
  }
  return out;
}

/// Runs SIFT on every view, then consolidates around the central view's
/// detections.
inline std::vector<Feature> repeated_sift(const LightField& lf, const DetectorParams& params,
                                          const ConsolidationParams& cp = {},
                                          StageTimings* timings = nullptr,
                                          int workers = worker_count()) {
  params.validate();
  cp.validate();
  require(lf.is_grayscale(), ErrorKind::invalid_parameter,
          "repeated SIFT requires a grayscale light field");
  const auto& d = lf.dims();
  require(d.ns % 2 == 1 && d.nt % 2 == 1, ErrorKind::invalid_parameter,
          "repeated SIFT needs a central view");
  const int cs = d.ns / 2;
  const int ct = d.nt / 2;

  std::vector<detail::ViewIndex> views(d.views());
  std::vector<StageTimings> view_timings(d.views());
  parallel_for(
      d.views(),
      [&](int i) {
        const int s = i / d.nt;
        const int t = i % d.nt;
        views[i].s = s - cs;
        views[i].t = t - ct;
        views[i].features = sift_detect(lf.view(s, t), params,
                                        timings ? &view_timings[i] : nullptr, 1);
        views[i].sort();
      },
      workers);
  if (timings)
    for (const auto& vt : view_timings) {
      timings->dog += vt.dog;
      timings->extrema += vt.extrema;
      timings->descriptors += vt.descriptors;
    }

  double max_abs_slope = 1.0;
  if (!params.slopes.empty())
    max_abs_slope = std::max(std::abs(params.slopes.front()), std::abs(params.slopes.back()));
  auto out = consolidate_views(views, cs * d.nt + ct, cp, max_abs_slope);
  std::sort(out.begin(), out.end(), feature_order);
  return out;
}

/// Predicted ratio of DoG work between repeated SIFT and LiFF.
inline double work_ratio(const LightFieldDims& dims, int num_slopes) {
  require(dims.ns > 0 && dims.nt > 0 && num_slopes > 0, ErrorKind::invalid_parameter,
          "work ratio needs positive dimensions");
  return static_cast<double>(dims.ns) * dims.nt / num_slopes;
}

}  // namespace liff
