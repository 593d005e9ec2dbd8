#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "liff/error.hpp"
#include "liff/image.hpp"

namespace liff {

struct LightFieldDims {
  int ns = 0;
  int nt = 0;
  int nu = 0;
  int nv = 0;

  int views() const noexcept { return ns * nt; }
  bool operator==(const LightFieldDims&) const = default;
};

/// Two-plane light field L(s,t,u,v) with optional colour channels. Samples
/// are stored (s,t,u,v,channel) with s slowest, matching the packed file
/// layout.
class LightField {
 public:
  LightField() = default;
  LightField(LightFieldDims dims, int channels = 1, double fill = 0.0)
      : dims_(dims), channels_(channels) {
    validate_shape();
    samples_.assign(total(), fill);
  }
  LightField(LightFieldDims dims, int channels, std::vector<double> samples)
      : dims_(dims), channels_(channels), samples_(std::move(samples)) {
    validate_shape();
    require(samples_.size() == total(), ErrorKind::invalid_input,
            "light field sample count does not match its dimensions");
  }

  const LightFieldDims& dims() const noexcept { return dims_; }
  int channels() const noexcept { return channels_; }
  bool is_grayscale() const noexcept { return channels_ == 1; }

  double& operator()(int s, int t, int u, int v, int c = 0) {
    return samples_[index(s, t, u, v, c)];
  }
  double operator()(int s, int t, int u, int v, int c = 0) const {
    return samples_[index(s, t, u, v, c)];
  }

  /// Contiguous samples of one view, (u,v,channel) order.
  std::span<const double> view_span(int s, int t) const {
    return {samples_.data() + index(s, t, 0, 0, 0), view_size()};
  }
  std::span<double> view_span(int s, int t) {
    return {samples_.data() + index(s, t, 0, 0, 0), view_size()};
  }

  /// One channel of one view as an Image.
  Image view(int s, int t, int channel = 0) const {
    require(s >= 0 && s < dims_.ns && t >= 0 && t < dims_.nt,
            ErrorKind::out_of_range, "view index out of range");
    Image img(dims_.nu, dims_.nv);
    auto src = view_span(s, t);
    auto dst = img.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = src[i * channels_ + channel];
    return img;
  }

  void set_view(int s, int t, const Image& img) {
    require(is_grayscale(), ErrorKind::invalid_parameter,
            "set_view requires a grayscale light field");
    require(img.nu() == dims_.nu && img.nv() == dims_.nv,
            ErrorKind::invalid_parameter, "view dimensions differ");
    auto dst = view_span(s, t);
    std::copy(img.pixels().begin(), img.pixels().end(), dst.begin());
  }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  bool operator==(const LightField&) const = default;

 private:
  std::size_t view_size() const noexcept {
    return static_cast<std::size_t>(dims_.nu) * dims_.nv * channels_;
  }
  std::size_t total() const noexcept {
    return static_cast<std::size_t>(dims_.views()) * view_size();
  }
  std::size_t index(int s, int t, int u, int v, int c) const noexcept {
    return ((((static_cast<std::size_t>(s) * dims_.nt + t) * dims_.nu + u) *
                 dims_.nv +
             v) *
                channels_ +
            c);
  }
  void validate_shape() const {
    require(dims_.ns > 0 && dims_.nt > 0 && dims_.nu > 0 && dims_.nv > 0,
            ErrorKind::invalid_input, "light field dimensions must be positive");
    require(channels_ == 1 || channels_ == 3, ErrorKind::invalid_input,
            "light field must have 1 or 3 channels");
  }

  LightFieldDims dims_;
  int channels_ = 1;
  std::vector<double> samples_;
};

/// True when every sample is finite and inside [0,1].
inline bool samples_in_unit_range(const LightField& lf) {
  for (double x : lf.samples())
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
  return true;
}

/// The view at the centre of an odd-sized view grid.
inline Image center_view(const LightField& lf) {
  const auto& d = lf.dims();
  require(d.ns % 2 == 1 && d.nt % 2 == 1, ErrorKind::invalid_parameter,
          "center_view requires an odd number of views in s and t");
  return lf.view((d.ns - 1) / 2, (d.nt - 1) / 2);
}

/// The k-by-k block of views centred on the central view.
inline LightField extract_center_views(const LightField& lf, int k) {
  const auto& d = lf.dims();
  require(k > 0 && k % 2 == 1, ErrorKind::invalid_parameter,
          "view count must be odd");
  require(k <= d.ns && k <= d.nt, ErrorKind::invalid_parameter,
          "requested more views than the light field holds");
  require(d.ns % 2 == 1 && d.nt % 2 == 1, ErrorKind::invalid_parameter,
          "light field has no unique central view");
  const int s0 = (d.ns - k) / 2;
  const int t0 = (d.nt - k) / 2;
  LightField out({k, k, d.nu, d.nv}, lf.channels());
  for (int s = 0; s < k; ++s)
    for (int t = 0; t < k; ++t) {
      auto src = lf.view_span(s0 + s, t0 + t);
      auto dst = out.view_span(s, t);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  return out;
}

}  // namespace liff
