#pragma once

// File output: atomic writes (temp file + rename) and field formats.
//
// CSV: header "y,value" in 1-d and "y1,...,yd,value" otherwise, one row per
// node in row-major order, numbers printed with 17 significant digits.
//
// Binary (all little-endian):
//   char[8]   magic "FGFIELD1"
//   uint32    dim
//   uint32    points per axis, repeated dim times
//   float64   box length per axis, repeated dim times
//   float64   time
//   float64   values, row-major, n^dim of them

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "fracgreen/field.hpp"

namespace fracgreen::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Write bytes to path via a sibling temp file and rename, so readers never
/// see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string field_to_csv(const Field& f) {
  std::string out;
  if (f.grid.dim == 1) {
    out = "y,value\n";
  } else {
    for (int ax = 0; ax < f.grid.dim; ++ax) out += "y" + std::to_string(ax + 1) + ",";
    out += "value\n";
  }
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto y = f.grid.point(i);
    for (int ax = 0; ax < f.grid.dim; ++ax) {
      out += format_double(y[ax]);
      out += ',';
    }
    out += format_double(f.values[i]);
    out += '\n';
  }
  return out;
}

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("binary field: truncated input");
  std::array<unsigned char, sizeof(T)> bits;
  std::memcpy(bits.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

inline constexpr char kMagic[8] = {'F', 'G', 'F', 'I', 'E', 'L', 'D', '1'};

}  // namespace detail

inline std::string field_to_binary(const Field& f) {
  std::string out(detail::kMagic, 8);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.dim));
  for (int ax = 0; ax < f.grid.dim; ++ax)
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.n));
  for (int ax = 0; ax < f.grid.dim; ++ax) detail::put_le<double>(out, f.grid.length[ax]);
  detail::put_le<double>(out, f.time);
  for (double v : f.values) detail::put_le<double>(out, v);
  return out;
}

inline Field field_from_binary(const std::string& in) {
  if (in.size() < 8 || std::memcmp(in.data(), detail::kMagic, 8) != 0)
    throw IoError("binary field: bad magic");
  std::size_t pos = 8;
  Grid g;
  g.dim = static_cast<int>(detail::get_le<std::uint32_t>(in, pos));
  if (g.dim < 1 || g.dim > 3) throw IoError("binary field: bad dimension");
  std::vector<std::uint32_t> shape(static_cast<std::size_t>(g.dim));
  for (auto& s : shape) s = detail::get_le<std::uint32_t>(in, pos);
  for (auto s : shape)
    if (s != shape[0]) throw IoError("binary field: only equal points per axis are supported");
  g.n = static_cast<int>(shape[0]);
  g.length.resize(static_cast<std::size_t>(g.dim));
  for (auto& l : g.length) l = detail::get_le<double>(in, pos);
  g.validate();
  const double t = detail::get_le<double>(in, pos);
  std::vector<double> v(g.size());
  for (auto& x : v) x = detail::get_le<double>(in, pos);
  if (pos != in.size()) throw IoError("binary field: trailing bytes");
  return Field(g, t, std::move(v));
}

}  // namespace fracgreen::io
