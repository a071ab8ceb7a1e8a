#ifndef OCAP_GRID_IO_HPP
#define OCAP_GRID_IO_HPP

// GridFunction persistence.
//
// CSV: header "x1,...,xn,value", then one row per lattice node in storage
// order. Numbers are written in shortest round-trip form.
//
// Binary: little-endian
//   int64 n | float64 R | int64 resolution | float64 value[resolution^n]

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ocap/error.hpp"
#include "ocap/grid.hpp"

namespace ocap {

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& out, const GridFunction& u) {
  const auto& dom = u.domain();
  for (int d = 0; d < dom.dim(); ++d) out << 'x' << (d + 1) << ',';
  out << "value\n";
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto x = dom.position(i);
    for (int d = 0; d < dom.dim(); ++d) out << format_double(x[d]) << ',';
    out << format_double(u[i]) << '\n';
  }
}

// Rows may come in any order; each coordinate tuple must hit a lattice node
// of `dom` to within h/4. Nodes not listed stay 0.
inline GridFunction read_csv(std::istream& in, DomainPtr dom) {
  GridFunction u(dom);
  std::string line;
  std::getline(in, line);  // header
  const int n = dom->dim();
  const double h = dom->spacing();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Point x{0, 0, 0};
    double v = 0;
    for (int d = 0; d < n; ++d)
      if (!(ss >> x[d])) throw IoError("grid CSV: malformed row " + std::to_string(row));
    if (!(ss >> v)) throw IoError("grid CSV: malformed row " + std::to_string(row));
    std::size_t id = dom->nearest(x);
    if (dom->distance(id, x) > 0.25 * h)
      throw IoError("grid CSV: row " + std::to_string(row) + " is off the lattice");
    u[id] = v;
  }
  return u;
}

inline void write_csv_file(const std::string& path, const GridFunction& u) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(out, u);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline GridFunction read_csv_file(const std::string& path, DomainPtr dom) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in, std::move(dom));
}

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw IoError("grid binary: truncated stream");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_binary(std::ostream& out, const GridFunction& u) {
  const auto& dom = u.domain();
  detail::put_le<std::int64_t>(out, dom.dim());
  detail::put_le<double>(out, dom.radius());
  detail::put_le<std::int64_t>(out, dom.resolution());
  for (double v : u.values()) detail::put_le<double>(out, v);
}

inline GridFunction read_binary(std::istream& in) {
  auto n = detail::get_le<std::int64_t>(in);
  auto R = detail::get_le<double>(in);
  auto N = detail::get_le<std::int64_t>(in);
  if (n != 2 && n != 3) throw IoError("grid binary: bad dimension");
  if (N < GridDomain::min_resolution || N > (1 << 16)) throw IoError("grid binary: bad resolution");
  auto dom = GridDomain::build(static_cast<int>(n), R, static_cast<int>(N));
  std::vector<double> v(dom->size());
  for (double& x : v) x = detail::get_le<double>(in);
  return GridFunction(dom, std::move(v));
}

inline void write_binary_file(const std::string& path, const GridFunction& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_binary(out, u);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline GridFunction read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_binary(in);
}

}  // namespace ocap

#endif  // OCAP_GRID_IO_HPP
