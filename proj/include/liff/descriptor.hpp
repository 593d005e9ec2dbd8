#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "liff/error.hpp"
#include "liff/image.hpp"

namespace liff {

inline constexpr int kDescriptorSize = 128;
using Descriptor = std::array<double, kDescriptorSize>;

/// A keypoint expressed in the pixel grid of the image it is sampled from.
struct KeypointFrame {
  double u = 0.0;
  double v = 0.0;
  double sigma = 1.0;
  double theta = 0.0;  // radians, measured from +u towards +v
};

namespace descriptor {
inline constexpr int kSpatialBins = 4;
inline constexpr int kOrientationBins = 8;
inline constexpr double kMagnification = 3.0;  // spatial bin width in sigmas
}  // namespace descriptor

inline double wrap_two_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

/// Raw 4x4x8 gradient-orientation histogram around a keypoint, rotated by
/// theta, with trilinear binning and a Gaussian window whose sigma is half the
/// window width. Samples outside the image contribute nothing.
inline Descriptor compute_descriptor(const Image& img, const KeypointFrame& kp) {
  using namespace descriptor;
  constexpr int nbp = kSpatialBins;
  constexpr int nbo = kOrientationBins;
  Descriptor hist{};

  const double bin_width = kMagnification * kp.sigma;
  const int radius = static_cast<int>(
      std::floor(std::numbers::sqrt2 * bin_width * (nbp + 1) / 2.0 + 0.5));
  const double c = std::cos(kp.theta);
  const double s = std::sin(kp.theta);
  const double window_sigma = nbp / 2.0;
  const int cu = static_cast<int>(std::lround(kp.u));
  const int cv = static_cast<int>(std::lround(kp.v));

  auto at = [&](int bu, int bv, int bo) -> double& {
    return hist[((bu + nbp / 2) * nbp + (bv + nbp / 2)) * nbo + bo];
  };

  for (int pu = cu - radius; pu <= cu + radius; ++pu) {
    if (pu < 1 || pu > img.nu() - 2) continue;
    for (int pv = cv - radius; pv <= cv + radius; ++pv) {
      if (pv < 1 || pv > img.nv() - 2) continue;
      const double gu = 0.5 * (img(pu + 1, pv) - img(pu - 1, pv));
      const double gv = 0.5 * (img(pu, pv + 1) - img(pu, pv - 1));
      const double mag = std::hypot(gu, gv);
      if (mag == 0.0) continue;

      const double du = pu - kp.u;
      const double dv = pv - kp.v;
      const double nx = (c * du + s * dv) / bin_width;
      const double ny = (-s * du + c * dv) / bin_width;
      const double angle = wrap_two_pi(std::atan2(gv, gu) - kp.theta);
      const double nt = nbo * angle / (2.0 * std::numbers::pi);
      const double weight =
          std::exp(-(nx * nx + ny * ny) / (2.0 * window_sigma * window_sigma));

      const int bx = static_cast<int>(std::floor(nx - 0.5));
      const int by = static_cast<int>(std::floor(ny - 0.5));
      const int bt = static_cast<int>(std::floor(nt));
      const double rx = nx - (bx + 0.5);
      const double ry = ny - (by + 0.5);
      const double rt = nt - bt;

      for (int dx = 0; dx < 2; ++dx) {
        const int x = bx + dx;
        if (x < -nbp / 2 || x >= nbp / 2) continue;
        const double wx = std::abs(1.0 - dx - rx);
        for (int dy = 0; dy < 2; ++dy) {
          const int y = by + dy;
          if (y < -nbp / 2 || y >= nbp / 2) continue;
          const double wy = std::abs(1.0 - dy - ry);
          for (int dt = 0; dt < 2; ++dt) {
            const double wt = std::abs(1.0 - dt - rt);
            at(x, y, (bt + dt) % nbo) += weight * mag * wx * wy * wt;
          }
        }
      }
    }
  }
  return hist;
}

/// L1 normalization followed by an elementwise square root. The result has
/// unit Euclidean norm; a zero histogram stays zero.
inline Descriptor normalize_rootsift(const Descriptor& raw) {
  double l1 = 0.0;
  for (double x : raw) {
    require(x >= 0.0, ErrorKind::invalid_parameter,
            "descriptor histogram entries must be non-negative");
    l1 += x;
  }
  Descriptor out{};
  if (l1 == 0.0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::sqrt(raw[i] / l1);
  return out;
}

inline double descriptor_distance(const Descriptor& a, const Descriptor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

struct Match {
  int a = 0;
  int b = 0;
  double distance = 0.0;
};

/// Ratio-test matching with mutual-best filtering. A ratio of 1 or more
/// disables the ratio test.
inline std::vector<Match> match_descriptors(std::span<const Descriptor> a,
                                            std::span<const Descriptor> b,
                                            double ratio = 0.8) {
  std::vector<Match> out;
  if (b.size() < 2 || a.empty()) return out;
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<int> best_in_b(a.size(), -1);
  std::vector<double> d1(a.size(), inf), d2(a.size(), inf);
  std::vector<int> best_in_a(b.size(), -1);
  std::vector<double> back(b.size(), inf);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = descriptor_distance(a[i], b[j]);
      if (d < d1[i]) {
        d2[i] = d1[i];
        d1[i] = d;
        best_in_b[i] = static_cast<int>(j);
      } else if (d < d2[i]) {
        d2[i] = d;
      }
      if (d < back[j]) {
        back[j] = d;
        best_in_a[j] = static_cast<int>(i);
      }
    }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int j = best_in_b[i];
    if (best_in_a[j] != static_cast<int>(i)) continue;
    if (ratio < 1.0 && !(d1[i] < ratio * d2[i])) continue;
    out.push_back({static_cast<int>(i), j, d1[i]});
  }
  return out;
}

}  // namespace liff
