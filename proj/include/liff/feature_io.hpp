#pragma once

// Feature files.
//
//   CSV:    header "u,v,sigma,lambda,theta,response,d0,...,d127", one row per
//           feature, every value printed with 9 significant digits.
//   binary: "LFFT" | u32 version=1 | u32 count | u32 columns=134 |
//           float64 values row by row, little-endian.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "liff/error.hpp"
#include "liff/feature.hpp"
#include "liff/byte_order.hpp"

namespace liff {

inline constexpr int kFeatureColumns = 6 + kDescriptorSize;

inline std::string feature_csv_header() {
  std::string h = "u,v,sigma,lambda,theta,response";
  for (int i = 0; i < kDescriptorSize; ++i) h += ",d" + std::to_string(i);
  return h;
}

namespace detail {

inline void append_number(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  out += buf;
}

inline std::array<double, kFeatureColumns> feature_row(const Feature& f) {
  std::array<double, kFeatureColumns> row{};
  row[0] = f.u;
  row[1] = f.v;
  row[2] = f.sigma;
  row[3] = f.lambda;
  row[4] = f.theta;
  row[5] = f.response;
  std::copy(f.descriptor.begin(), f.descriptor.end(), row.begin() + 6);
  return row;
}

inline Feature feature_from_row(const std::array<double, kFeatureColumns>& row) {
  Feature f;
  f.u = row[0];
  f.v = row[1];
  f.sigma = row[2];
  f.lambda = row[3];
  f.theta = row[4];
  f.response = row[5];
  std::copy(row.begin() + 6, row.end(), f.descriptor.begin());
  return f;
}

}  // namespace detail

inline std::string features_to_csv(const std::vector<Feature>& features) {
  std::string out = feature_csv_header() + "\n";
  for (const auto& f : features) {
    const auto row = detail::feature_row(f);
    for (int i = 0; i < kFeatureColumns; ++i) {
      if (i) out += ',';
      detail::append_number(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<Feature> features_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::invalid_input,
          "feature file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line.rfind("u,v,sigma,lambda,theta,response", 0) == 0, ErrorKind::invalid_input,
          "feature file has an unexpected header");
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  require(columns == kFeatureColumns, ErrorKind::invalid_input,
          "descriptor length mismatch: expected " + std::to_string(kDescriptorSize) +
              " descriptor columns, found " + std::to_string(columns - 6));
  std::vector<Feature> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::array<double, kFeatureColumns> row{};
    const char* p = line.c_str();
    for (int i = 0; i < kFeatureColumns; ++i) {
      char* end = nullptr;
      row[i] = std::strtod(p, &end);
      require(end != p, ErrorKind::invalid_input,
              "malformed number on feature line " + std::to_string(line_no));
      p = end;
      if (i + 1 < kFeatureColumns) {
        require(*p == ',', ErrorKind::invalid_input,
                "descriptor length mismatch on feature line " + std::to_string(line_no));
        ++p;
      }
    }
    while (*p == '\r' || *p == ' ') ++p;
    require(*p == '\0', ErrorKind::invalid_input,
            "descriptor length mismatch on feature line " + std::to_string(line_no));
    out.push_back(detail::feature_from_row(row));
  }
  return out;
}

inline void save_features_binary(const std::vector<Feature>& features,
                                 const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "cannot open " + path.string() + " for writing");
  os.write("LFFT", 4);
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(features.size()));
  detail::put_u32(os, kFeatureColumns);
  for (const auto& f : features)
    for (double x : detail::feature_row(f)) detail::put_f64(os, x);
}

inline std::vector<Feature> load_features_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::invalid_input, "cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  require(is && std::memcmp(magic.data(), "LFFT", 4) == 0, ErrorKind::invalid_input,
          "not a binary feature file");
  require(detail::get_u32(is) == 1, ErrorKind::invalid_input,
          "unsupported feature file version");
  const std::uint32_t count = detail::get_u32(is);
  require(detail::get_u32(is) == kFeatureColumns, ErrorKind::invalid_input,
          "descriptor length mismatch in binary feature file");
  std::vector<Feature> out;
  out.reserve(count);
  std::array<unsigned char, 8 * kFeatureColumns> raw{};
  for (std::uint32_t i = 0; i < count; ++i) {
    is.read(reinterpret_cast<char*>(raw.data()), raw.size());
    require(static_cast<bool>(is), ErrorKind::invalid_input, "truncated feature file");
    std::array<double, kFeatureColumns> row{};
    for (int c = 0; c < kFeatureColumns; ++c) row[c] = detail::get_f64(&raw[8 * c]);
    out.push_back(detail::feature_from_row(row));
  }
  return out;
}

inline bool is_binary_feature_path(const std::filesystem::path& path) {
  return path.extension() == ".bin";
}

inline void save_features(const std::vector<Feature>& features,
                          const std::filesystem::path& path) {
  if (is_binary_feature_path(path)) return save_features_binary(features, path);
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "cannot open " + path.string() + " for writing");
  os << features_to_csv(features);
}

inline std::vector<Feature> load_features(const std::filesystem::path& path) {
  if (is_binary_feature_path(path)) return load_features_binary(path);
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::invalid_input, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return features_from_csv(ss.str());
}

}  // namespace liff
