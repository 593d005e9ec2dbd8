#pragma once

#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "liff/descriptor.hpp"

namespace liff {

/// A detected feature in central-view pixel coordinates. `lambda` is NaN for
/// features from a single 2D image.
struct Feature {
  double u = 0.0;
  double v = 0.0;
  double sigma = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double theta = 0.0;
  double response = 0.0;
  Descriptor descriptor{};

  bool has_slope() const { return !std::isnan(lambda); }
};

/// Output order: strongest first, then by position and orientation.
inline bool feature_order(const Feature& a, const Feature& b) {
  return std::tuple(-a.response, a.u, a.v, a.theta) <
         std::tuple(-b.response, b.u, b.v, b.theta);
}

inline std::vector<Match> match_features(const std::vector<Feature>& a,
                                         const std::vector<Feature>& b,
                                         double ratio = 0.8) {
  std::vector<Descriptor> da, db;
  da.reserve(a.size());
  db.reserve(b.size());
  for (const auto& f : a) da.push_back(f.descriptor);
  for (const auto& f : b) db.push_back(f.descriptor);
  return match_descriptors(da, db, ratio);
}

}  // namespace liff
