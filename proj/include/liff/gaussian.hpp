#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "liff/error.hpp"
#include "liff/image.hpp"

namespace liff {

/// Half-width of the truncated Gaussian kernel.
inline int gaussian_radius(double sigma) {
  return static_cast<int>(std::ceil(4.0 * sigma));
}

/// Sampled 1D Gaussian over [-ceil(4 sigma), ceil(4 sigma)], normalized to
/// unit sum.
inline std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::invalid_parameter,
          "gaussian sigma must be positive");
  const int r = gaussian_radius(sigma);
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& x : k) x /= sum;
  return k;
}

/// Separable Gaussian blur with edge replication.
inline Image gaussian_blur(const Image& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int nu = img.nu();
  const int nv = img.nv();

  // Along u: each output row is a weighted sum of whole input rows.
  Image tmp(nu, nv, 0.0);
  for (int u = 0; u < nu; ++u) {
    double* dst = tmp.row(u).data();
    for (int i = -r; i <= r; ++i) {
      const double w = k[i + r];
      const double* src = img.row(std::clamp(u + i, 0, nu - 1)).data();
      for (int v = 0; v < nv; ++v) dst[v] += w * src[v];
    }
  }

  // Along v, through an edge-padded row buffer.
  Image out(nu, nv);
  std::vector<double> padded(nv + 2 * r);
  for (int u = 0; u < nu; ++u) {
    const double* src = tmp.row(u).data();
    std::fill(padded.begin(), padded.begin() + r, src[0]);
    std::copy(src, src + nv, padded.begin() + r);
    std::fill(padded.begin() + r + nv, padded.end(), src[nv - 1]);
    double* dst = out.row(u).data();
    for (int v = 0; v < nv; ++v) {
      const double* p = padded.data() + v;
      double acc = 0.0;
      for (int j = 0; j <= 2 * r; ++j) acc += k[j] * p[j];
      dst[v] = acc;
    }
  }
  return out;
}

/// 2x bilinear upsampling; output pixel i samples the input at i/2.
inline Image upsample2(const Image& img) {
  const int nu = img.nu();
  const int nv = img.nv();
  Image out(2 * nu, 2 * nv);
  for (int u = 0; u < 2 * nu; ++u) {
    const int u0 = u / 2;
    const int u1 = std::min(u0 + (u & 1), nu - 1);
    const double* a = img.row(u0).data();
    const double* b = img.row(u1).data();
    double* dst = out.row(u).data();
    for (int v = 0; v < 2 * nv; ++v) {
      const int v0 = v / 2;
      const int v1 = std::min(v0 + (v & 1), nv - 1);
      dst[v] = 0.25 * (a[v0] + a[v1] + b[v0] + b[v1]);
    }
  }
  return out;
}

/// Keeps every second pixel.
inline Image downsample2(const Image& img) {
  Image out(img.nu() / 2, img.nv() / 2);
  for (int u = 0; u < out.nu(); ++u) {
    const double* src = img.row(2 * u).data();
    double* dst = out.row(u).data();
    for (int v = 0; v < out.nv(); ++v) dst[v] = src[2 * v];
  }
  return out;
}

}  // namespace liff
