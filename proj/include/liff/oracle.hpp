#pragma once

// Brute-force scale-slope space: every DoG level at every slope is a direct
// 4D convolution of the light field with a combined scale and slope filter,
// evaluated at the central view. Slow by construction; it exists to check the
// focal-stack route.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "liff/error.hpp"
#include "liff/image.hpp"
#include "liff/lightfield.hpp"
#include "liff/params.hpp"

namespace liff::oracle {

/// Size limits for the brute-force path.
inline constexpr int kMaxPixels = 64;
inline constexpr int kMaxScales = 6;
inline constexpr int kMaxSlopes = 5;

/// Sampled 4D kernel over centred view offsets (s', t') and pixel taps (a, b).
struct Kernel4D {
  int ns = 0;
  int nt = 0;
  int half_u = 0;
  int half_v = 0;
  std::vector<double> taps;

  double operator()(int s, int t, int a, int b) const {
    return taps[index(s, t, a, b)];
  }
  double& operator()(int s, int t, int a, int b) { return taps[index(s, t, a, b)]; }

  double sum() const {
    double acc = 0.0;
    for (double x : taps) acc += x;
    return acc;
  }

 private:
  std::size_t index(int s, int t, int a, int b) const {
    const int su = 2 * half_u + 1;
    const int sv = 2 * half_v + 1;
    return ((static_cast<std::size_t>(s + ns / 2) * nt + (t + nt / 2)) * su + (a + half_u)) *
               sv +
           (b + half_v);
  }
};

/// Frequency-planar filter: unit taps on the plane through the origin that a
/// scene point at `slope` traces, i.e. (a, b) = (round(-slope*s'),
/// round(-slope*t')), normalized to unit sum. As a convolution this gathers
/// L(s', t', u - round(slope*s'), v - round(slope*t')) into the central view.
inline Kernel4D frequency_planar_filter(double slope, const LightFieldDims& dims) {
  require(dims.ns > 0 && dims.nt > 0 && dims.ns % 2 == 1 && dims.nt % 2 == 1,
          ErrorKind::invalid_parameter, "planar filter needs an odd view grid");
  require(std::isfinite(slope), ErrorKind::invalid_parameter, "slope must be finite");
  Kernel4D k;
  k.ns = dims.ns;
  k.nt = dims.nt;
  k.half_u = static_cast<int>(std::round(std::abs(slope) * (dims.ns / 2)));
  k.half_v = static_cast<int>(std::round(std::abs(slope) * (dims.nt / 2)));
  require(k.half_u < dims.nu && k.half_v < dims.nv, ErrorKind::invalid_parameter,
          "empty support: slope shifts exceed the image");
  k.taps.assign(static_cast<std::size_t>(dims.ns) * dims.nt * (2 * k.half_u + 1) *
                    (2 * k.half_v + 1),
                0.0);
  const double w = 1.0 / dims.views();
  for (int s = -dims.ns / 2; s <= dims.ns / 2; ++s)
    for (int t = -dims.nt / 2; t <= dims.nt / 2; ++t)
      k(s, t, static_cast<int>(std::round(-slope * s)),
        static_cast<int>(std::round(-slope * t))) = w;
  return k;
}

/// Normalized 2D Gaussian over a square of half-width ceil(4 sigma).
inline Image gaussian_2d(double sigma) {
  const int r = static_cast<int>(std::ceil(4.0 * sigma));
  Image g(2 * r + 1, 2 * r + 1);
  double sum = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) {
      g(a + r, b + r) = std::exp(-0.5 * (a * a + b * b) / (sigma * sigma));
      sum += g(a + r, b + r);
    }
  for (double& x : g.pixels()) x /= sum;
  return g;
}

/// DoG kernel G(sigma_hi) - G(sigma_lo) on the larger support.
inline Image dog_kernel(double sigma_lo, double sigma_hi) {
  const Image lo = gaussian_2d(sigma_lo);
  Image out = gaussian_2d(sigma_hi);
  const int off = (out.nu() - lo.nu()) / 2;
  for (int a = 0; a < lo.nu(); ++a)
    for (int b = 0; b < lo.nv(); ++b) out(a + off, b + off) -= lo(a, b);
  return out;
}

/// Blur levels of a single, non-downsampled octave: level s has total blur
/// base_sigma * 2^(s/levels) and is produced from the input (assumed blur
/// input_sigma) by one Gaussian of the remaining width.
inline std::vector<double> applied_sigmas(const DetectorParams& p) {
  std::vector<double> out;
  for (int s = 0; s < p.levels_per_octave + 3; ++s) {
    const double total = p.base_sigma * std::exp2(static_cast<double>(s) / p.levels_per_octave);
    out.push_back(std::sqrt(total * total - p.input_sigma * p.input_sigma));
  }
  return out;
}

/// D at the central view for every slope and DoG level: dog[slope][level].
/// Pixels whose filter support leaves the light field are NaN.
struct Space6D {
  std::vector<double> slopes;
  std::vector<std::vector<Image>> dog;
  int margin = 0;  // pixels closer than this to a border are NaN
};

inline void check_caps(const LightField& lf, const DetectorParams& params) {
  const auto& d = lf.dims();
  require(lf.is_grayscale(), ErrorKind::invalid_parameter, "oracle needs grayscale input");
  require(d.nu <= kMaxPixels && d.nv <= kMaxPixels &&
              params.levels_per_octave + 2 <= kMaxScales &&
              static_cast<int>(params.slopes.size()) <= kMaxSlopes,
          ErrorKind::out_of_range, "oracle-too-large: brute-force path is capped");
  require(!params.slopes.empty(), ErrorKind::invalid_parameter,
          "oracle needs an explicit slope list");
}

/// Direct 4D convolution of the light field with H = H_sigma * H_lambda for
/// every (sigma, lambda), restricted to the central view.
inline Space6D build_6d_space(const LightField& lf, const DetectorParams& params) {
  params.validate();
  check_caps(lf, params);
  const auto& d = lf.dims();
  const auto sig = applied_sigmas(params);
  const int num_dog = static_cast<int>(sig.size()) - 1;

  int max_shift = 0;
  for (double slope : params.slopes)
    max_shift = std::max({max_shift,
                          static_cast<int>(std::round(std::abs(slope) * (d.ns / 2))),
                          static_cast<int>(std::round(std::abs(slope) * (d.nt / 2)))});
  const int dog_radius = static_cast<int>(std::ceil(4.0 * sig.back()));

  Space6D out;
  out.slopes = params.slopes;
  out.margin = dog_radius + max_shift;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int cs = d.ns / 2;
  const int ct = d.nt / 2;

  for (double slope : params.slopes) {
    const Kernel4D planar = frequency_planar_filter(slope, d);
    std::vector<Image> levels;
    for (int l = 0; l < num_dog; ++l) {
      const Image hs = dog_kernel(sig[l], sig[l + 1]);
      const int r = hs.nu() / 2;
      Image D(d.nu, d.nv, nan);
      for (int u = out.margin; u < d.nu - out.margin; ++u)
        for (int v = out.margin; v < d.nv - out.margin; ++v) {
          // Convolution at the central view (s0, t0) = (0, 0): sum over the
          // combined kernel H(s', t', a, b) = sum_{planar taps} hs(a - pa, b - pb)
          // times L(-s', -t', u - a, v - b).
          double acc = 0.0;
          for (int s = -cs; s <= cs; ++s)
            for (int t = -ct; t <= ct; ++t)
              for (int pa = -planar.half_u; pa <= planar.half_u; ++pa)
                for (int pb = -planar.half_v; pb <= planar.half_v; ++pb) {
                  const double w = planar(s, t, pa, pb);
                  if (w == 0.0) continue;
                  for (int a = -r; a <= r; ++a)
                    for (int b = -r; b <= r; ++b)
                      acc += w * hs(a + r, b + r) *
                             lf(cs - s, ct - t, u - a - pa, v - b - pb);
                }
          D(u, v) = acc;
        }
      levels.push_back(std::move(D));
    }
    out.dog.push_back(std::move(levels));
  }
  return out;
}

/// 4D convolution of every view with H_lambda (zero outside the field).
inline LightField apply_planar(const LightField& lf, const Kernel4D& k) {
  const auto& d = lf.dims();
  const int cs = d.ns / 2;
  const int ct = d.nt / 2;
  LightField out(d, 1, 0.0);
  for (int s0 = -cs; s0 <= cs; ++s0)
    for (int t0 = -ct; t0 <= ct; ++t0)
      for (int u = 0; u < d.nu; ++u)
        for (int v = 0; v < d.nv; ++v) {
          double acc = 0.0;
          for (int s = -cs; s <= cs; ++s)
            for (int t = -ct; t <= ct; ++t) {
              const int ss = s0 - s;
              const int tt = t0 - t;
              if (ss < -cs || ss > cs || tt < -ct || tt > ct) continue;
              for (int a = -k.half_u; a <= k.half_u; ++a)
                for (int b = -k.half_v; b <= k.half_v; ++b) {
                  const double w = k(s, t, a, b);
                  if (w == 0.0) continue;
                  const int uu = u - a;
                  const int vv = v - b;
                  if (uu < 0 || vv < 0 || uu >= d.nu || vv >= d.nv) continue;
                  acc += w * lf(ss + cs, tt + ct, uu, vv);
                }
            }
          out(s0 + cs, t0 + ct, u, v) = acc;
        }
  return out;
}

/// 2D convolution of every view with a DoG kernel (zero outside the field).
inline LightField apply_dog(const LightField& lf, const Image& kernel) {
  const auto& d = lf.dims();
  const int r = kernel.nu() / 2;
  LightField out(d, 1, 0.0);
  for (int s = 0; s < d.ns; ++s)
    for (int t = 0; t < d.nt; ++t)
      for (int u = 0; u < d.nu; ++u)
        for (int v = 0; v < d.nv; ++v) {
          double acc = 0.0;
          for (int a = -r; a <= r; ++a)
            for (int b = -r; b <= r; ++b) {
              const int uu = u - a;
              const int vv = v - b;
              if (uu < 0 || vv < 0 || uu >= d.nu || vv >= d.nv) continue;
              acc += kernel(a + r, b + r) * lf(s, t, uu, vv);
            }
          out(s, t, u, v) = acc;
        }
  return out;
}

/// Integer extremum of the brute-force space.
struct Extremum {
  int level = 0;
  int slope = 0;
  int u = 0;
  int v = 0;
  auto operator<=>(const Extremum&) const = default;
};

/// Strict 80-neighbour extrema over (u, v, level, slope) with |D| above
/// 0.8 * peak_threshold, among samples whose whole neighbourhood is defined.
inline std::vector<Extremum> find_extrema(const Space6D& space, double peak_threshold) {
  std::vector<Extremum> out;
  const int M = static_cast<int>(space.dog.size());
  if (M < 3) return out;
  const int L = static_cast<int>(space.dog.front().size());
  const int nu = space.dog.front().front().nu();
  const int nv = space.dog.front().front().nv();
  for (int i = 1; i + 1 < M; ++i)
    for (int l = 1; l + 1 < L; ++l)
      for (int u = 1; u + 1 < nu; ++u)
        for (int v = 1; v + 1 < nv; ++v) {
          const double x = space.dog[i][l](u, v);
          if (std::isnan(x) || !(std::abs(x) > 0.8 * peak_threshold)) continue;
          bool is_max = true;
          bool is_min = true;
          bool defined = true;
          for (int di = -1; di <= 1; ++di)
            for (int dl = -1; dl <= 1; ++dl)
              for (int du = -1; du <= 1; ++du)
                for (int dv = -1; dv <= 1; ++dv) {
                  if (di == 0 && dl == 0 && du == 0 && dv == 0) continue;
                  const double n = space.dog[i + di][l + dl](u + du, v + dv);
                  if (std::isnan(n)) defined = false;
                  if (!(x > n)) is_max = false;
                  if (!(x < n)) is_min = false;
                }
          if (defined && (is_max || is_min)) out.push_back({l, i, u, v});
        }
  return out;
}

}  // namespace liff::oracle
