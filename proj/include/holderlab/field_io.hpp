#pragma once

// Binary field container plus JSON sidecar.
//
// Layout (all little-endian):
//   char[4]  magic "HLFD"
//   uint32   version (1)
//   uint32   dims
//   uint64   n_i            (dims entries)
//   float64  L_i            (dims entries)
//   uint8    side           (0 physical, 1 frequency)
//   float64  re, im pairs   (row-major, last axis fastest)

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "field.hpp"

namespace holderlab {

static_assert(std::endian::native == std::endian::little, "field container assumes a little-endian host");

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field container: truncated input");
  return v;
}

}  // namespace detail

inline constexpr char field_magic[4] = {'H', 'L', 'F', 'D'};
inline constexpr std::uint32_t field_version = 1;

inline nlohmann::json field_header_json(const SampledField& u) {
  nlohmann::json j;
  j["format"] = "HLFD";
  j["version"] = field_version;
  j["dims"] = u.grid().dims();
  j["points"] = u.grid().point_counts();
  j["extent"] = u.grid().extents();
  j["side"] = to_string(u.side());
  return j;
}

inline void write_field(const SampledField& u, const std::string& path) {
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(field_magic, 4);
    detail::put<std::uint32_t>(os, field_version);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid().dims()));
    for (auto n : u.grid().point_counts()) detail::put<std::uint64_t>(os, n);
    for (auto L : u.grid().extents()) detail::put<double>(os, L);
    detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(u.side()));
    for (const auto& v : u.values()) {
      detail::put<double>(os, v.real());
      detail::put<double>(os, v.imag());
    }
    if (!os) throw std::runtime_error("write failed for " + path);
  }
  std::ofstream js(path + ".json", std::ios::trunc);
  if (!js) throw std::runtime_error("cannot open " + path + ".json for writing");
  js << field_header_json(u).dump(2) << '\n';
}

inline SampledField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, field_magic, 4) != 0) throw std::runtime_error(path + ": not a field container");
  if (detail::take<std::uint32_t>(is) != field_version) throw std::runtime_error(path + ": unsupported version");
  const auto dims = detail::take<std::uint32_t>(is);
  if (dims == 0 || dims > max_dims) throw std::runtime_error(path + ": bad axis count");
  std::vector<std::size_t> n(dims);
  std::vector<double> L(dims);
  for (auto& v : n) v = static_cast<std::size_t>(detail::take<std::uint64_t>(is));
  for (auto& v : L) v = detail::take<double>(is);
  const auto side = detail::take<std::uint8_t>(is);
  if (side > 1) throw std::runtime_error(path + ": bad side flag");
  Grid grid(L, n);
  std::vector<complex> values(grid.size());
  for (auto& v : values) {
    const double re = detail::take<double>(is);
    const double im = detail::take<double>(is);
    v = {re, im};
  }
  return SampledField(std::move(grid), std::move(values), static_cast<Side>(side));
}

}  // namespace holderlab
