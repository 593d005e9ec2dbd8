#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "liff/error.hpp"
#include "liff/focal_stack.hpp"
#include "liff/gaussian.hpp"
#include "liff/image.hpp"
#include "liff/parallel.hpp"
#include "liff/params.hpp"

namespace liff {

/// One octave of a Gaussian / difference-of-Gaussian pyramid. Gaussian level
/// s has blur base_sigma * 2^(index + s/levels) in input pixels; DoG level s
/// is gaussians[s+1] - gaussians[s].
struct Octave {
  int index = 0;
  std::vector<Image> gaussians;
  std::vector<Image> dogs;
  std::vector<double> sigmas;  // absolute blur of each Gaussian level

  int nu() const { return gaussians.front().nu(); }
  int nv() const { return gaussians.front().nv(); }
  /// Input pixels per octave pixel.
  double pixel_scale() const { return std::ldexp(1.0, index); }
};

struct DoGPyramid {
  std::vector<Octave> octaves;
  int levels_per_octave = 3;
  double base_sigma = 1.6;

  /// Absolute scale of a (possibly fractional) level in an octave.
  double sigma_at(int octave_index, double level) const {
    return base_sigma * std::exp2(octave_index + level / levels_per_octave);
  }
};

/// Per-slope DoG pyramids over a focal stack: the search volume D(u,v,sigma,lambda).
struct ScaleSlopeSpace {
  std::vector<DoGPyramid> per_slope;
  std::vector<double> slopes;

  int num_slopes() const { return static_cast<int>(per_slope.size()); }
};

/// Gaussian pyramid with levels_per_octave + 3 levels per octave and adjacent
/// differences as DoG levels. Octaves stop once the smaller image side would
/// drop below 8 pixels.
inline DoGPyramid build_dog_pyramid(const Image& img, const DetectorParams& params) {
  params.validate();
  require(img.nu() >= 16 && img.nv() >= 16, ErrorKind::invalid_parameter,
          "image must be at least 16x16 for a DoG pyramid");
  const int S = params.levels_per_octave;
  const int num_levels = S + 3;
  const double sigma0 = params.base_sigma;

  Image base;
  if (params.first_octave == -1) {
    base = upsample2(img);
  } else {
    base = img;
    for (int o = 0; o < params.first_octave; ++o) base = downsample2(base);
  }
  // Blur already present in the first octave base, in its own pixel units.
  const double sigma_in = params.input_sigma * std::exp2(-params.first_octave);

  DoGPyramid pyr;
  pyr.levels_per_octave = S;
  pyr.base_sigma = sigma0;

  auto local_sigma = [&](int s) { return sigma0 * std::exp2(static_cast<double>(s) / S); };
  auto blur_by = [](const Image& im, double sigma_sq) {
    return sigma_sq > 1e-12 ? gaussian_blur(im, std::sqrt(sigma_sq)) : im;
  };

  for (int k = 0; k < params.num_octaves; ++k) {
    if (k > 0) {
      const Image& prev = pyr.octaves.back().gaussians[S];
      if (std::min(prev.nu(), prev.nv()) / 2 < 8) break;
      base = downsample2(prev);
    } else if (std::min(base.nu(), base.nv()) < 8) {
      break;
    }
    // Blur carried by this octave's base, in octave pixels.
    const double present = k == 0 ? sigma_in : sigma0;

    Octave oct;
    oct.index = params.first_octave + k;
    oct.gaussians.reserve(num_levels);
    for (int s = 0; s < num_levels; ++s) {
      const double target = local_sigma(s);
      if (params.direct_blur || s == 0) {
        oct.gaussians.push_back(blur_by(base, target * target - present * present));
      } else {
        const double prev_sigma = local_sigma(s - 1);
        oct.gaussians.push_back(
            blur_by(oct.gaussians.back(), target * target - prev_sigma * prev_sigma));
      }
      oct.sigmas.push_back(pyr.sigma_at(oct.index, s));
    }
    oct.dogs.reserve(num_levels - 1);
    for (int s = 0; s + 1 < num_levels; ++s) {
      Image d(oct.gaussians[s].nu(), oct.gaussians[s].nv());
      auto a = oct.gaussians[s].pixels();
      auto b = oct.gaussians[s + 1].pixels();
      auto out = d.pixels();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[i] - a[i];
      oct.dogs.push_back(std::move(d));
    }
    pyr.octaves.push_back(std::move(oct));
  }
  return pyr;
}

inline ScaleSlopeSpace build_scale_slope_space(const FocalStack& stack,
                                               const DetectorParams& params,
                                               int workers = worker_count()) {
  require(stack.size() > 0, ErrorKind::invalid_parameter, "focal stack is empty");
  ScaleSlopeSpace space;
  space.slopes = stack.slopes;
  space.per_slope.resize(stack.slices.size());
  parallel_for(
      stack.size(),
      [&](int i) { space.per_slope[i] = build_dog_pyramid(stack.slices[i], params); },
      workers);
  return space;
}

}  // namespace liff
