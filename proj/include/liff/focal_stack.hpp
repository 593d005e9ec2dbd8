#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "liff/error.hpp"
#include "liff/image.hpp"
#include "liff/lightfield.hpp"
#include "liff/parallel.hpp"

namespace liff {

/// Slope-indexed refocused images F(u,v,lambda).
struct FocalStack {
  std::vector<Image> slices;
  std::vector<double> slopes;
  LightFieldDims source_dims;

  int size() const noexcept { return static_cast<int>(slices.size()); }
};

/// `count` evenly spaced slopes covering [lo, hi].
inline std::vector<double> linear_slopes(double lo, double hi, int count) {
  require(count >= 1, ErrorKind::invalid_parameter, "slope count must be positive");
  require(std::isfinite(lo) && std::isfinite(hi), ErrorKind::invalid_parameter,
          "slope range must be finite");
  if (count == 1) return {0.5 * (lo + hi)};
  require(lo < hi, ErrorKind::invalid_parameter, "slope range must be increasing");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return out;
}

/// Default slope list: one slope per view row, spanning [-1, 1].
inline std::vector<double> default_slopes(const LightFieldDims& dims) {
  return linear_slopes(-1.0, 1.0, dims.ns);
}

/// Integer pixel shift applied to a view at centred offset `offset` when
/// refocusing at `slope`. Rounds half away from zero, so shifts are odd in
/// the offset.
inline int refocus_shift(double slope, int offset) {
  return static_cast<int>(std::round(slope * offset));
}

/// Shift-and-sum refocus: F(u,v) = mean over views of
/// L(s,t, u - round(slope*s'), v - round(slope*t')), where (s',t') are view
/// offsets from the central view. Each pixel is divided by the number of views
/// whose shifted sample fell inside the image.
inline Image refocus_slice(const LightField& lf, double slope) {
  require(lf.is_grayscale(), ErrorKind::invalid_parameter,
          "refocus requires a grayscale light field");
  require(std::isfinite(slope), ErrorKind::invalid_parameter, "slope must be finite");
  const auto& d = lf.dims();
  const int cs = d.ns / 2;
  const int ct = d.nt / 2;

  Image sum(d.nu, d.nv, 0.0);
  // The valid-view count separates: views valid along u times views valid
  // along v.
  std::vector<int> count_u(d.nu, 0);
  std::vector<int> count_v(d.nv, 0);
  for (int s = 0; s < d.ns; ++s) {
    const int du = refocus_shift(slope, s - cs);
    for (int u = std::max(0, du); u < std::min(d.nu, d.nu + du); ++u) ++count_u[u];
  }
  for (int t = 0; t < d.nt; ++t) {
    const int dv = refocus_shift(slope, t - ct);
    for (int v = std::max(0, dv); v < std::min(d.nv, d.nv + dv); ++v) ++count_v[v];
  }

  for (int s = 0; s < d.ns; ++s) {
    const int du = refocus_shift(slope, s - cs);
    const int u_lo = std::max(0, du);
    const int u_hi = std::min(d.nu, d.nu + du);
    for (int t = 0; t < d.nt; ++t) {
      const int dv = refocus_shift(slope, t - ct);
      const int v_lo = std::max(0, dv);
      const int v_hi = std::min(d.nv, d.nv + dv);
      auto view = lf.view_span(s, t);
      for (int u = u_lo; u < u_hi; ++u) {
        const double* src = view.data() + static_cast<std::size_t>(u - du) * d.nv;
        double* dst = sum.row(u).data();
        for (int v = v_lo; v < v_hi; ++v) dst[v] += src[v - dv];
      }
    }
  }

  for (int u = 0; u < d.nu; ++u) {
    double* row = sum.row(u).data();
    for (int v = 0; v < d.nv; ++v) {
      const int n = count_u[u] * count_v[v];
      if (n == 0)
        fail(ErrorKind::out_of_range,
             "slope-out-of-range: slope " + std::to_string(slope) +
                 " leaves pixels with no contributing view");
      row[v] /= n;
    }
  }
  return sum;
}

inline FocalStack build_focal_stack(const LightField& lf, std::vector<double> slopes,
                                    int workers = worker_count()) {
  require(!slopes.empty(), ErrorKind::invalid_parameter, "slope list is empty");
  for (std::size_t i = 1; i < slopes.size(); ++i)
    require(slopes[i] > slopes[i - 1], ErrorKind::invalid_parameter,
            "slopes must be strictly increasing");
  FocalStack stack;
  stack.source_dims = lf.dims();
  stack.slices.resize(slopes.size());
  parallel_for(
      static_cast<int>(slopes.size()),
      [&](int i) { stack.slices[i] = refocus_slice(lf, slopes[i]); }, workers);
  stack.slopes = std::move(slopes);
  return stack;
}

inline FocalStack build_focal_stack(const LightField& lf) {
  return build_focal_stack(lf, default_slopes(lf.dims()));
}

}  // namespace liff
