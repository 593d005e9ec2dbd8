#pragma once

// Light field file formats.
//
//   packed:    "LIFF" | u32 version=1 | u32 ns,nt,nu,nv,channels |
//              float64 samples in (s,t,u,v,channel) order, little-endian.
//   view-grid: directory with meta.json {ns,nt,nu,nv,channels} and one PNG per
//              view named view_<s>_<t>.png (height nu, width nv), 8 or 16 bit.
//
// The view-grid reader needs libpng at link time.

#include <png.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "liff/byte_order.hpp"
#include "liff/error.hpp"
#include "liff/image.hpp"
#include "liff/lightfield.hpp"

namespace liff {

enum class LightFieldFormat { view_grid, packed };

namespace detail {

inline std::string view_name(int s, int t) {
  return "view_" + std::to_string(s) + "_" + std::to_string(t) + ".png";
}

struct PngPixels {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;  // row-major, interleaved, in [0,1]
};

inline PngPixels read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(ErrorKind::invalid_input,
         "cannot read PNG " + path.string() + ": " + image.message);
  const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (wide) image.format |= PNG_FORMAT_FLAG_LINEAR;

  PngPixels px;
  px.height = static_cast<int>(image.height);
  px.width = static_cast<int>(image.width);
  px.channels = colour ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(px.height) * px.width * px.channels;
  px.data.resize(n);
  if (wide) {
    std::vector<std::uint16_t> buf(n);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
      fail(ErrorKind::invalid_input, "corrupt PNG " + path.string());
    for (std::size_t i = 0; i < n; ++i) px.data[i] = buf[i] / 65535.0;
  } else {
    std::vector<std::uint8_t> buf(n);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
      fail(ErrorKind::invalid_input, "corrupt PNG " + path.string());
    for (std::size_t i = 0; i < n; ++i) px.data[i] = buf[i] / 255.0;
  }
  return px;
}

inline void write_png(const std::filesystem::path& path, const PngPixels& px,
                      bool sixteen_bit) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(px.width);
  image.height = static_cast<png_uint_32>(px.height);
  image.format = px.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t n = px.data.size();
  bool ok = false;
  if (sixteen_bit) {
    image.format |= PNG_FORMAT_FLAG_LINEAR;
    std::vector<std::uint16_t> buf(n);
    for (std::size_t i = 0; i < n; ++i)
      buf[i] = static_cast<std::uint16_t>(
          std::lround(std::clamp(px.data[i], 0.0, 1.0) * 65535.0));
    ok = png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr);
  } else {
    std::vector<std::uint8_t> buf(n);
    for (std::size_t i = 0; i < n; ++i)
      buf[i] = static_cast<std::uint8_t>(
          std::lround(std::clamp(px.data[i], 0.0, 1.0) * 255.0));
    ok = png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr);
  }
  require(ok, ErrorKind::invalid_input, "cannot write PNG " + path.string());
}

}  // namespace detail

inline void save_packed(const LightField& lf, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "cannot open " + path.string() + " for writing");
  os.write("LIFF", 4);
  detail::put_u32(os, 1);
  const auto& d = lf.dims();
  for (int x : {d.ns, d.nt, d.nu, d.nv, lf.channels()})
    detail::put_u32(os, static_cast<std::uint32_t>(x));
  for (double x : lf.samples()) detail::put_f64(os, x);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "write failed for " + path.string());
}

inline LightField load_packed(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::invalid_input,
          "invalid light field: cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  require(is && std::memcmp(magic.data(), "LIFF", 4) == 0,
          ErrorKind::invalid_input, "invalid light field: bad magic");
  require(detail::get_u32(is) == 1, ErrorKind::invalid_input,
          "invalid light field: unsupported version");
  std::array<std::uint32_t, 5> h{};
  for (auto& x : h) x = detail::get_u32(is);
  constexpr std::uint32_t cap = 1u << 16;
  for (auto x : h)
    require(x > 0 && x < cap, ErrorKind::invalid_input,
            "invalid light field: bad dimensions");
  LightFieldDims dims{static_cast<int>(h[0]), static_cast<int>(h[1]),
                      static_cast<int>(h[2]), static_cast<int>(h[3])};
  const int channels = static_cast<int>(h[4]);
  require(channels == 1 || channels == 3, ErrorKind::invalid_input,
          "invalid light field: bad channel count");
  const std::size_t n = static_cast<std::size_t>(dims.views()) * dims.nu *
                        dims.nv * channels;
  std::vector<unsigned char> raw(n * 8);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  require(static_cast<std::size_t>(is.gcount()) == raw.size(),
          ErrorKind::invalid_input, "invalid light field: truncated samples");
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = detail::get_f64(&raw[8 * i]);
  return LightField(dims, channels, std::move(samples));
}

inline void save_view_grid(const LightField& lf, const std::filesystem::path& dir,
                           bool sixteen_bit = true) {
  std::filesystem::create_directories(dir);
  const auto& d = lf.dims();
  nlohmann::json meta = {{"ns", d.ns}, {"nt", d.nt}, {"nu", d.nu},
                         {"nv", d.nv}, {"channels", lf.channels()}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
  for (int s = 0; s < d.ns; ++s)
    for (int t = 0; t < d.nt; ++t) {
      auto span = lf.view_span(s, t);
      detail::PngPixels px{d.nu, d.nv, lf.channels(),
                           std::vector<double>(span.begin(), span.end())};
      detail::write_png(dir / detail::view_name(s, t), px, sixteen_bit);
    }
}

inline LightField load_view_grid(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  require(std::filesystem::is_regular_file(meta_path), ErrorKind::invalid_input,
          "invalid light field: missing " + meta_path.string());
  nlohmann::json meta;
  try {
    std::ifstream(meta_path) >> meta;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_input,
         std::string("invalid light field: corrupt meta.json: ") + e.what());
  }
  auto field = [&](const char* key, int fallback = -1) {
    if (!meta.contains(key)) {
      require(fallback > 0, ErrorKind::invalid_input,
              std::string("invalid light field: meta.json lacks ") + key);
      return fallback;
    }
    require(meta[key].is_number_integer() && meta[key].get<int>() > 0,
            ErrorKind::invalid_input,
            std::string("invalid light field: bad meta.json field ") + key);
    return meta[key].get<int>();
  };
  LightFieldDims dims{field("ns"), field("nt"), field("nu"), field("nv")};
  const int channels = field("channels", 1);
  require(channels == 1 || channels == 3, ErrorKind::invalid_input,
          "invalid light field: channels must be 1 or 3");

  LightField lf(dims, channels);
  for (int s = 0; s < dims.ns; ++s)
    for (int t = 0; t < dims.nt; ++t) {
      const auto path = dir / detail::view_name(s, t);
      require(std::filesystem::is_regular_file(path), ErrorKind::invalid_input,
              "invalid light field: missing view " + path.string() +
                  " (view grid is not rectangular)");
      auto px = detail::read_png(path);
      require(px.height == dims.nu && px.width == dims.nv,
              ErrorKind::invalid_input,
              "invalid light field: inconsistent subimage dimensions in " +
                  path.string());
      auto dst = lf.view_span(s, t);
      if (px.channels == channels) {
        std::copy(px.data.begin(), px.data.end(), dst.begin());
      } else if (px.channels == 1) {
        for (std::size_t i = 0; i < px.data.size(); ++i)
          for (int c = 0; c < 3; ++c) dst[3 * i + c] = px.data[i];
      } else {
        fail(ErrorKind::invalid_input,
             "invalid light field: colour view in a grayscale grid");
      }
    }
  return lf;
}

inline LightField load_lightfield(const std::filesystem::path& path,
                                  LightFieldFormat format) {
  return format == LightFieldFormat::view_grid ? load_view_grid(path)
                                               : load_packed(path);
}

/// Directories are view grids, everything else is packed.
inline LightField load_lightfield(const std::filesystem::path& path) {
  return load_lightfield(path, std::filesystem::is_directory(path)
                                   ? LightFieldFormat::view_grid
                                   : LightFieldFormat::packed);
}

inline Image load_image_png(const std::filesystem::path& path) {
  auto px = detail::read_png(path);
  Image img(px.height, px.width);
  auto dst = img.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (px.channels == 1) {
      dst[i] = px.data[i];
    } else {
      dst[i] = 0.299 * px.data[3 * i] + 0.587 * px.data[3 * i + 1] +
               0.114 * px.data[3 * i + 2];
    }
  }
  return img;
}

inline void save_image_png(const Image& img, const std::filesystem::path& path,
                           bool sixteen_bit = false) {
  detail::PngPixels px{img.nu(), img.nv(), 1,
                       std::vector<double>(img.pixels().begin(), img.pixels().end())};
  detail::write_png(path, px, sixteen_bit);
}

}  // namespace liff
