#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "liff/lightfield.hpp"

namespace liff {

namespace grayscale {
inline constexpr double kRed = 0.299;
inline constexpr double kGreen = 0.587;
inline constexpr double kBlue = 0.114;
inline constexpr double kGamma = 0.5;
inline constexpr int kEqualizationBins = 256;
}  // namespace grayscale

inline double luminance(double r, double g, double b) {
  return grayscale::kRed * r + grayscale::kGreen * g + grayscale::kBlue * b;
}

/// In-place histogram equalization over [0,1]. Each value maps to the
/// fraction of samples falling in its bin or below.
inline void equalize_histogram(std::span<double> values) {
  constexpr int bins = grayscale::kEqualizationBins;
  if (values.empty()) return;
  auto bin_of = [](double x) {
    return std::clamp(static_cast<int>(std::floor(x * bins)), 0, bins - 1);
  };
  std::array<std::size_t, bins> hist{};
  for (double x : values) ++hist[bin_of(x)];
  std::array<double, bins> cdf{};
  std::size_t acc = 0;
  for (int b = 0; b < bins; ++b) {
    acc += hist[b];
    cdf[b] = static_cast<double>(acc) / static_cast<double>(values.size());
  }
  for (double& x : values) x = cdf[bin_of(x)];
}

/// Colour to grayscale: luminance, then gamma 0.5, then per-view histogram
/// equalization. Grayscale input passes through unchanged.
inline LightField to_grayscale(const LightField& lf) {
  if (lf.is_grayscale()) return lf;
  const auto& d = lf.dims();
  LightField out(d, 1);
  for (int s = 0; s < d.ns; ++s)
    for (int t = 0; t < d.nt; ++t) {
      auto src = lf.view_span(s, t);
      auto dst = out.view_span(s, t);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const double y = luminance(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
        dst[i] = std::pow(std::clamp(y, 0.0, 1.0), grayscale::kGamma);
      }
      equalize_histogram(dst);
    }
  return out;
}

}  // namespace liff
