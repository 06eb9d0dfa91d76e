#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "vqmimo/error.hpp"

namespace vqmimo::binio {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts need byte swaps");

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), ErrorCode::kFormat, "truncated file while reading " + what);
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, const std::string& what) {
  const auto n = get<std::uint32_t>(is, what + " length");
  require(n < (1u << 20), ErrorCode::kFormat, "implausible string length in " + what);
  std::string s(n, '\0');
  is.read(s.data(), n);
  require(static_cast<bool>(is), ErrorCode::kFormat, "truncated file while reading " + what);
  return s;
}

inline void make_parent_dirs(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
}

}  // namespace vqmimo::binio
