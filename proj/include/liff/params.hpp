#pragma once

#include <vector>

#include "liff/error.hpp"

namespace liff {

/// Parameters shared by LiFF and the 2D baselines.
struct DetectorParams {
  double peak_threshold = 0.0066;
  double edge_threshold = 10.0;
  int num_octaves = 4;
  int levels_per_octave = 3;
  int first_octave = -1;
  /// Focal-stack slopes. Empty means one slope per view row over [-1, 1].
  std::vector<double> slopes;

  /// Blur of octave 0, level 0, in input pixels.
  double base_sigma = 1.6;
  /// Blur assumed already present in the input image.
  double input_sigma = 0.5;
  /// Blur every Gaussian level straight from the octave base instead of
  /// incrementally from the previous level. Slower, but each level is then a
  /// single truncated Gaussian, which the brute-force comparison relies on.
  bool direct_blur = false;

  void validate() const {
    require(peak_threshold >= 0.0, ErrorKind::invalid_parameter,
            "peak threshold must be non-negative");
    require(edge_threshold >= 1.0, ErrorKind::invalid_parameter,
            "edge threshold must be at least 1");
    require(num_octaves >= 1, ErrorKind::invalid_parameter,
            "need at least one octave");
    require(levels_per_octave >= 1, ErrorKind::invalid_parameter,
            "need at least one level per octave");
    require(first_octave >= -1, ErrorKind::invalid_parameter,
            "first octave must be -1 or greater");
    require(base_sigma > 0.0 && input_sigma >= 0.0, ErrorKind::invalid_parameter,
            "blur constants must be positive");
    for (std::size_t i = 1; i < slopes.size(); ++i)
      require(slopes[i] > slopes[i - 1], ErrorKind::invalid_parameter,
              "slopes must be strictly increasing");
  }
};

}  // namespace liff
