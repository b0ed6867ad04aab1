#pragma once

// File emission helpers shared by the CLI driver: deterministic CSV tables,
// a small binary grid-dump format, and atomic (write-temp-then-rename) file
// replacement so concurrent readers never observe partial documents.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "magstep/core.hpp"

namespace magstep {

/// Shortest exact decimal form of a double (round-trips bit-for-bit).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == x) return probe;
  }
  return buf;
}

/// Writes `content` to `path` atomically via a sibling temp file + rename.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    require(out.good(), "short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

/// CSV table: header row naming the columns, then a schema-version comment
/// line, then one row per record.  All numeric cells use round-trip doubles.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns, int schema_version = 1)
      : n_cols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      body_ += columns[i];
      body_ += (i + 1 < columns.size()) ? ',' : '\n';
    }
    body_ += "# schema_version=" + std::to_string(schema_version) + "\n";
  }

  void add_row(const std::vector<double>& cells) {
    require(cells.size() == n_cols_, "CsvTable: row arity mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      body_ += format_double(cells[i]);
      body_ += (i + 1 < cells.size()) ? ',' : '\n';
    }
  }

  /// Row with a leading string cell (e.g. a check name) and numeric rest.
  void add_row(const std::string& label, const std::vector<double>& cells) {
    require(cells.size() + 1 == n_cols_, "CsvTable: row arity mismatch");
    body_ += label;
    for (double c : cells) {
      body_ += ',';
      body_ += format_double(c);
    }
    body_ += '\n';
  }

  const std::string& str() const { return body_; }

  void write(const std::filesystem::path& path) const {
    atomic_write_file(path, body_);
  }

 private:
  std::size_t n_cols_;
  std::string body_;
};

// ---------------------------------------------------------------------------
// Binary grid dumps: 32-byte header (magic "MSTP", u32 version, u64 n_s,
// u64 n_t, 8 reserved bytes), then row-major (s-major) complex samples as
// little-endian float64 (re, im) pairs.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline std::uint64_t get_u64(const unsigned char* p, int nbytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f64(std::string& s, double x) {
  static_assert(sizeof(double) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(s, bits);
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t bits = get_u64(p, 8);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace detail

struct GridDump {
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::vector<cplx> values;  // row-major, s-major
};

inline void write_grid_dump(const std::filesystem::path& path, std::size_t n_s,
                            std::size_t n_t, const std::vector<cplx>& values) {
  require(values.size() == n_s * n_t, "grid dump: size mismatch");
  std::string buf;
  buf.reserve(32 + values.size() * 16);
  buf += "MSTP";
  detail::put_u32(buf, 1u);  // format version
  detail::put_u64(buf, n_s);
  detail::put_u64(buf, n_t);
  detail::put_u64(buf, 0u);  // reserved
  for (const cplx& z : values) {
    detail::put_f64(buf, z.real());
    detail::put_f64(buf, z.imag());
  }
  atomic_write_file(path, buf);
}

inline GridDump read_grid_dump(const std::filesystem::path& path) {
  std::string buf = read_file(path);
  require(buf.size() >= 32 && buf.compare(0, 4, "MSTP") == 0,
          "grid dump: bad magic in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  GridDump d;
  d.n_s = detail::get_u64(p + 8, 8);
  d.n_t = detail::get_u64(p + 16, 8);
  require(buf.size() == 32 + d.n_s * d.n_t * 16, "grid dump: truncated file");
  d.values.resize(d.n_s * d.n_t);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.values[i] = cplx(detail::get_f64(p + 32 + 16 * i),
                       detail::get_f64(p + 32 + 16 * i + 8));
  }
  return d;
}

}  // namespace magstep
