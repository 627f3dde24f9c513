#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace ratio::detail {

template <typename T> T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

inline void write_f64(std::ostream &out, double v) {
  const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
  out.write(reinterpret_cast<const char *>(&bits), sizeof bits);
}

inline void write_i32(std::ostream &out, std::int32_t v) {
  const std::int32_t le = to_little_endian(v);
  out.write(reinterpret_cast<const char *>(&le), sizeof le);
}

inline bool read_f64(std::istream &in, double &v) {
  std::uint64_t bits = 0;
  if (!in.read(reinterpret_cast<char *>(&bits), sizeof bits)) return false;
  v = std::bit_cast<double>(to_little_endian(bits));
  return true;
}

inline bool read_i32(std::istream &in, std::int32_t &v) {
  std::int32_t le = 0;
  if (!in.read(reinterpret_cast<char *>(&le), sizeof le)) return false;
  v = to_little_endian(le);
  return true;
}

} // namespace ratio::detail
