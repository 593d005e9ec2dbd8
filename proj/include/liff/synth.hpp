#pragma once

// Synthetic light fields of flat disks with known position, size and slope,
// noise injection, and scoring of detections against the ground truth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "liff/error.hpp"
#include "liff/feature.hpp"
#include "liff/lightfield.hpp"

namespace liff {

struct Disk {
  double u = 0.0;
  double v = 0.0;
  double radius = 1.0;
  double slope = 0.0;
  double intensity = 1.0;

  /// Blob scale a DoG detector should report for this disk.
  double expected_sigma() const { return radius / std::numbers::sqrt2; }
};

/// Disks are the scored ground truth; occluders are rendered the same way but
/// never scored. In every view a disk at slope lambda is centred at
/// (u - lambda*s', v - lambda*t'), and larger slopes are nearer the camera.
struct SyntheticScene {
  LightFieldDims dims{9, 9, 256, 256};
  double background = 0.45;
  double contrast = 0.1;
  std::vector<Disk> disks;
  std::vector<Disk> occluders;

  void validate() const {
    require(dims.ns > 0 && dims.nt > 0 && dims.nu > 0 && dims.nv > 0,
            ErrorKind::invalid_parameter, "scene dimensions must be positive");
    require(contrast > 0.0 && contrast <= 1.0, ErrorKind::invalid_parameter,
            "contrast must lie in (0, 1]");
    require(background >= 0.0 && background <= 1.0, ErrorKind::invalid_parameter,
            "background must lie in [0, 1]");
    auto check = [](const Disk& d) {
      require(d.radius > 0.0, ErrorKind::invalid_parameter, "disk radius must be positive");
      require(std::isfinite(d.u) && std::isfinite(d.v) && std::isfinite(d.slope),
              ErrorKind::invalid_parameter, "disk parameters must be finite");
      require(d.intensity >= 0.0 && d.intensity <= 1.0, ErrorKind::invalid_parameter,
              "disk intensity must lie in [0, 1]");
    };
    for (const auto& d : disks) check(d);
    for (const auto& d : occluders) check(d);
  }
};

/// The 26-disk evaluation scene: a jittered 6x5 grid with four cells left
/// empty, radii cycling through 4, 4.5 and 5 pixels and slopes spread over
/// [-0.6, 0.6], all at the scene contrast above the background.
inline SyntheticScene standard_scene() {
  SyntheticScene scene;
  constexpr int cols = 6;
  constexpr int rows = 5;
  constexpr std::array<double, 3> radii{4.0, 4.5, 5.0};
  const double du = 200.0 / (rows - 1);
  const double dv = 200.0 / (cols - 1);
  int n = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int cell = r * cols + c;
      if (cell == 7 || cell == 10 || cell == 19 || cell == 28) continue;
      Disk d;
      d.u = 28.0 + r * du + 3.0 * std::sin(1.7 * cell);
      d.v = 28.0 + c * dv + 3.0 * std::cos(2.3 * cell);
      d.radius = radii[n % radii.size()];
      d.slope = -0.6 + 1.2 * ((n * 11) % 26) / 25.0;
      d.intensity = scene.background + scene.contrast;
      scene.disks.push_back(d);
      ++n;
    }
  return scene;
}

namespace detail {

/// Fraction of the pixel square centred on (pu, pv) covered by a disk,
/// estimated with 4x4 supersampling.
inline double disk_coverage(double pu, double pv, double cu, double cv, double r) {
  const double d = std::hypot(pu - cu, pv - cv);
  if (d <= r - std::numbers::sqrt2 / 2) return 1.0;
  if (d >= r + std::numbers::sqrt2 / 2) return 0.0;
  int inside = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double su = pu - 0.5 + (i + 0.5) / 4.0 - cu;
      const double sv = pv - 0.5 + (j + 0.5) / 4.0 - cv;
      if (su * su + sv * sv <= r * r) ++inside;
    }
  return inside / 16.0;
}

inline void paint_disk(std::span<double> view, int nu, int nv, const Disk& d, int s,
                       int t) {
  const double cu = d.u - d.slope * s;
  const double cv = d.v - d.slope * t;
  const int u0 = std::max(0, static_cast<int>(std::floor(cu - d.radius - 1)));
  const int u1 = std::min(nu - 1, static_cast<int>(std::ceil(cu + d.radius + 1)));
  const int v0 = std::max(0, static_cast<int>(std::floor(cv - d.radius - 1)));
  const int v1 = std::min(nv - 1, static_cast<int>(std::ceil(cv + d.radius + 1)));
  for (int u = u0; u <= u1; ++u)
    for (int v = v0; v <= v1; ++v) {
      const double cov = disk_coverage(u, v, cu, cv, d.radius);
      if (cov == 0.0) continue;
      double& px = view[static_cast<std::size_t>(u) * nv + v];
      px += cov * (d.intensity - px);
    }
}

inline bool disk_visible_somewhere(const Disk& d, const LightFieldDims& dims) {
  const int cs = dims.ns / 2;
  const int ct = dims.nt / 2;
  for (int s = 0; s < dims.ns; ++s)
    for (int t = 0; t < dims.nt; ++t) {
      const double cu = d.u - d.slope * (s - cs);
      const double cv = d.v - d.slope * (t - ct);
      if (cu + d.radius > -0.5 && cu - d.radius < dims.nu - 0.5 &&
          cv + d.radius > -0.5 && cv - d.radius < dims.nv - 0.5)
        return true;
    }
  return false;
}

}  // namespace detail

/// Renders every view with far-to-near painter's compositing and
/// anti-aliased disk edges.
inline LightField render_lf(const SyntheticScene& scene) {
  scene.validate();
  std::vector<Disk> objects = scene.disks;
  objects.insert(objects.end(), scene.occluders.begin(), scene.occluders.end());
  for (const auto& d : objects)
    require(detail::disk_visible_somewhere(d, scene.dims), ErrorKind::out_of_range,
            "out-of-frame: a disk lies outside every view");
  std::stable_sort(objects.begin(), objects.end(),
                   [](const Disk& a, const Disk& b) { return a.slope < b.slope; });

  const auto& dims = scene.dims;
  LightField lf(dims, 1, scene.background);
  const int cs = dims.ns / 2;
  const int ct = dims.nt / 2;
  for (int s = 0; s < dims.ns; ++s)
    for (int t = 0; t < dims.nt; ++t) {
      auto view = lf.view_span(s, t);
      for (const auto& d : objects)
        detail::paint_disk(view, dims.nu, dims.nv, d, s - cs, t - ct);
    }
  return lf;
}

/// Seed for trial `index` of a run with master seed `master` (splitmix64).
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// i.i.d. zero-mean Gaussian noise of the given variance on every sample,
/// clipped to [0, 1]. Deterministic for a given seed.
inline LightField add_noise(const LightField& lf, double variance, std::uint64_t seed) {
  require(variance >= 0.0 && std::isfinite(variance), ErrorKind::invalid_parameter,
          "noise variance must be non-negative");
  LightField out = lf;
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(variance));
  for (double& x : out.samples()) x = std::clamp(x + noise(rng), 0.0, 1.0);
  return out;
}

struct EvalReport {
  double tp_rate = 0.0;
  int tp_count = 0;
  int fp_count = 0;
  int keypoints = 0;        // distinct (u, v, sigma, lambda) among the features
  double slope_rmse = std::numeric_limits<double>::quiet_NaN();
  /// (feature index, disk index) for every true positive.
  std::vector<std::pair<int, int>> assignments;
};

/// Greedy one-to-one assignment of detections to disks by distance. A disk is
/// found when a detection lies within tol_px of its centre with a scale within
/// a factor tol_scale of the expected one. Orientation copies of one keypoint
/// count once; unassigned keypoints are false positives.
inline EvalReport evaluate(const std::vector<Feature>& features, const SyntheticScene& scene,
                           double tol_px = 3.0, double tol_scale = 1.5) {
  EvalReport rep;
  // Canonical order keeps the result independent of input order.
  std::vector<int> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto key = [&](int i) {
    const auto& f = features[i];
    return std::tuple(f.u, f.v, f.sigma, std::isnan(f.lambda) ? 0.0 : f.lambda,
                      f.theta, i);
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  std::vector<int> unique;
  for (int i : order) {
    if (!unique.empty()) {
      const auto& p = features[unique.back()];
      const auto& f = features[i];
      const bool same_slope =
          (std::isnan(p.lambda) && std::isnan(f.lambda)) || p.lambda == f.lambda;
      if (p.u == f.u && p.v == f.v && p.sigma == f.sigma && same_slope) continue;
    }
    unique.push_back(i);
  }
  rep.keypoints = static_cast<int>(unique.size());

  struct Pair {
    double dist;
    int key;
    int disk;
  };
  std::vector<Pair> pairs;
  for (int k = 0; k < static_cast<int>(unique.size()); ++k) {
    const auto& f = features[unique[k]];
    for (int j = 0; j < static_cast<int>(scene.disks.size()); ++j) {
      const auto& d = scene.disks[j];
      const double dist = std::hypot(f.u - d.u, f.v - d.v);
      const double ratio = f.sigma / d.expected_sigma();
      if (dist <= tol_px && ratio <= tol_scale && ratio >= 1.0 / tol_scale)
        pairs.push_back({dist, k, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.key, a.disk) < std::tie(b.dist, b.key, b.disk);
  });
  std::vector<bool> key_used(unique.size(), false);
  std::vector<bool> disk_used(scene.disks.size(), false);
  double sq = 0.0;
  int with_slope = 0;
  for (const auto& p : pairs) {
    if (key_used[p.key] || disk_used[p.disk]) continue;
    key_used[p.key] = disk_used[p.disk] = true;
    const auto& f = features[unique[p.key]];
    rep.assignments.emplace_back(unique[p.key], p.disk);
    if (f.has_slope()) {
      const double e = f.lambda - scene.disks[p.disk].slope;
      sq += e * e;
      ++with_slope;
    }
  }
  std::sort(rep.assignments.begin(), rep.assignments.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  rep.tp_count = static_cast<int>(rep.assignments.size());
  rep.fp_count = rep.keypoints - rep.tp_count;
  rep.tp_rate = scene.disks.empty()
                    ? 0.0
                    : static_cast<double>(rep.tp_count) / scene.disks.size();
  if (with_slope > 0) rep.slope_rmse = std::sqrt(sq / with_slope);
  return rep;
}

// JSON mirror of SyntheticScene. Unknown keys are rejected by name.

inline nlohmann::json disk_to_json(const Disk& d) {
  return {{"u", d.u}, {"v", d.v}, {"radius", d.radius}, {"slope", d.slope},
          {"intensity", d.intensity}};
}

inline nlohmann::json scene_to_json(const SyntheticScene& scene) {
  nlohmann::json j;
  j["dims"] = {scene.dims.ns, scene.dims.nt, scene.dims.nu, scene.dims.nv};
  j["background"] = scene.background;
  j["contrast"] = scene.contrast;
  j["disks"] = nlohmann::json::array();
  for (const auto& d : scene.disks) j["disks"].push_back(disk_to_json(d));
  j["occluders"] = nlohmann::json::array();
  for (const auto& d : scene.occluders) j["occluders"].push_back(disk_to_json(d));
  return j;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  require(j.is_object(), ErrorKind::invalid_parameter, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorKind::invalid_parameter, "unknown field '" + key + "' in " + where);
  }
}

inline double json_number(const nlohmann::json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorKind::invalid_parameter,
          std::string("missing field '") + key + "' in " + where);
  require(j[key].is_number(), ErrorKind::invalid_parameter,
          std::string("field '") + key + "' in " + where + " must be a number");
  return j[key].get<double>();
}

inline Disk disk_from_json(const nlohmann::json& j, double default_intensity,
                           const std::string& where) {
  reject_unknown_keys(j, {"u", "v", "radius", "slope", "intensity"}, where);
  Disk d;
  d.u = json_number(j, "u", where);
  d.v = json_number(j, "v", where);
  d.radius = json_number(j, "radius", where);
  d.slope = json_number(j, "slope", where);
  d.intensity = j.contains("intensity") ? json_number(j, "intensity", where)
                                        : default_intensity;
  return d;
}

}  // namespace detail

/// Parses a scene document. Missing "disks" means the standard 26-disk layout;
/// a disk without "intensity" sits at background + contrast.
inline SyntheticScene scene_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"dims", "background", "contrast", "disks", "occluders"},
                              "scene");
  SyntheticScene scene = standard_scene();
  if (j.contains("dims")) {
    const auto& d = j["dims"];
    require(d.is_array() && d.size() == 4, ErrorKind::invalid_parameter,
            "field 'dims' must be [ns, nt, nu, nv]");
    for (const auto& x : d)
      require(x.is_number_integer(), ErrorKind::invalid_parameter,
              "field 'dims' must hold integers");
    scene.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>(), d[3].get<int>()};
  }
  if (j.contains("background")) scene.background = detail::json_number(j, "background", "scene");
  if (j.contains("contrast")) scene.contrast = detail::json_number(j, "contrast", "scene");
  const double fill = scene.background + scene.contrast;
  if (j.contains("disks")) {
    require(j["disks"].is_array(), ErrorKind::invalid_parameter, "field 'disks' must be an array");
    scene.disks.clear();
    for (const auto& d : j["disks"]) scene.disks.push_back(detail::disk_from_json(d, fill, "disk"));
  } else {
    for (auto& d : scene.disks) d.intensity = fill;
  }
  scene.occluders.clear();
  if (j.contains("occluders")) {
    require(j["occluders"].is_array(), ErrorKind::invalid_parameter,
            "field 'occluders' must be an array");
    for (const auto& d : j["occluders"])
      scene.occluders.push_back(detail::disk_from_json(d, fill, "occluder"));
  }
  scene.validate();
  return scene;
}

}  // namespace liff
