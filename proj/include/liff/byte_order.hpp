#pragma once

// Little-endian scalar encoding shared by the binary file formats.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include "liff/error.hpp"

namespace liff::detail {

inline void put_u32(std::ostream& os, std::uint32_t x) {
  const std::array<char, 4> b{static_cast<char>(x & 0xff),
                              static_cast<char>((x >> 8) & 0xff),
                              static_cast<char>((x >> 16) & 0xff),
                              static_cast<char>((x >> 24) & 0xff)};
  os.write(b.data(), 4);
}

inline void put_f64(std::ostream& os, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  require(static_cast<bool>(is), ErrorKind::invalid_input, "truncated header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t{b[3]} << 24);
}

inline double get_f64(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[i]} << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace liff::detail
