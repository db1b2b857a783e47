#pragma once

// Little-endian helpers shared by the embedding file and the cluster sidecar.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "aura/error.hpp"

namespace aura::detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& in, std::string_view what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw InvalidInput("truncated file while reading " + std::string(what));
  }
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline float get_f32(std::istream& in, std::string_view what) {
  return std::bit_cast<float>(get_u32(in, what));
}

inline std::uint64_t get_u64(std::istream& in, std::string_view what) {
  const std::uint64_t lo = get_u32(in, what);
  const std::uint64_t hi = get_u32(in, what);
  return lo | (hi << 32);
}

inline double get_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(get_u64(in, what));
}

/// 16 byte header: 8 byte magic, u32 count, u32 dim.
struct Header {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
};

inline void write_header(std::ostream& out, std::string_view magic, Header h) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  put_u32(out, h.count);
  put_u32(out, h.dim);
}

inline Header read_header(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw InvalidInput("bad magic: expected \"" + std::string(magic) + "\"");
  }
  Header h;
  h.count = get_u32(in, "header count");
  h.dim = get_u32(in, "header dim");
  return h;
}

}  // namespace aura::detail
