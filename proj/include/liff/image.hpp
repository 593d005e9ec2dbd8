#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "liff/error.hpp"

namespace liff {

/// Row-major 2D grid of doubles. `u` indexes rows, `v` indexes columns, so
/// pixel (u,v) lives at data[u * nv + v].
class Image {
 public:
  Image() = default;
  Image(int nu, int nv, double fill = 0.0)
      : nu_(nu), nv_(nv), data_(static_cast<std::size_t>(nu) * nv, fill) {
    require(nu >= 0 && nv >= 0, ErrorKind::invalid_parameter,
            "image dimensions must be non-negative");
  }
  Image(int nu, int nv, std::vector<double> data)
      : nu_(nu), nv_(nv), data_(std::move(data)) {
    require(data_.size() == static_cast<std::size_t>(nu) * nv,
            ErrorKind::invalid_parameter, "image data size mismatch");
  }

  int nu() const noexcept { return nu_; }
  int nv() const noexcept { return nv_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int u, int v) { return data_[index(u, v)]; }
  double operator()(int u, int v) const { return data_[index(u, v)]; }

  /// Edge-replicated access.
  double clamped(int u, int v) const {
    return (*this)(std::clamp(u, 0, nu_ - 1), std::clamp(v, 0, nv_ - 1));
  }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < nu_ && v < nv_;
  }

  std::span<double> row(int u) {
    return {data_.data() + static_cast<std::size_t>(u) * nv_,
            static_cast<std::size_t>(nv_)};
  }
  std::span<const double> row(int u) const {
    return {data_.data() + static_cast<std::size_t>(u) * nv_,
            static_cast<std::size_t>(nv_)};
  }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(u) * nv_ + v;
  }

  int nu_ = 0;
  int nv_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const Image& a, const Image& b) {
  require(a.nu() == b.nu() && a.nv() == b.nv(), ErrorKind::invalid_parameter,
          "image dimensions differ");
  double worst = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i)
    worst = std::max(worst, std::abs(pa[i] - pb[i]));
  return worst;
}

}  // namespace liff
