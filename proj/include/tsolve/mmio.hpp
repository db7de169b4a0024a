#pragma once

/// @file mmio.hpp
/// @brief Matrix Market reader and writer (real, integer and pattern fields;
/// general, symmetric and skew-symmetric storage).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "trace.hpp"

namespace tsolve {

enum class MmFormat { Coordinate, Array };
enum class MmField { Real, Integer, Pattern };
enum class MmSymmetry { General, Symmetric, SkewSymmetric };

struct MmHeader {
  MmFormat format = MmFormat::Coordinate;
  MmField field = MmField::Real;
  MmSymmetry symmetry = MmSymmetry::General;
};

struct MmReadStats {
  MmHeader header;
  std::size_t duplicates = 0;  ///< coordinate entries merged by summation
};

namespace mm_detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline std::size_t parse_index(std::string_view tok, std::size_t line, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("expected a nonnegative integer for ") + what + ", got '" +
                               std::string(tok) + "'");
  return v;
}

inline double parse_value(std::string_view tok, MmField field, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (field == MmField::Integer) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ParseError(line, "expected an integer value, got '" + std::string(tok) + "'");
    return static_cast<double>(v);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected a real value, got '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

inline MmHeader parse_header(std::string_view line) {
  const auto tok = split(line);
  if (tok.empty() || tok[0] != "%%MatrixMarket")
    throw ParseError(1, "missing %%MatrixMarket banner");
  if (tok.size() != 5) throw ParseError(1, "banner must have exactly five tokens");
  if (lower(tok[1]) != "matrix") throw ParseError(1, "unsupported object '" + std::string(tok[1]) + "'");

  MmHeader h;
  const std::string format = lower(tok[2]);
  if (format == "coordinate")
    h.format = MmFormat::Coordinate;
  else if (format == "array")
    h.format = MmFormat::Array;
  else
    throw ParseError(1, "unsupported format '" + std::string(tok[2]) + "'");

  const std::string field = lower(tok[3]);
  if (field == "real")
    h.field = MmField::Real;
  else if (field == "integer")
    h.field = MmField::Integer;
  else if (field == "pattern")
    h.field = MmField::Pattern;
  else if (field == "complex")
    throw ParseError(1, "complex matrices are not supported");
  else
    throw ParseError(1, "unsupported field '" + std::string(tok[3]) + "'");

  const std::string sym = lower(tok[4]);
  if (sym == "general")
    h.symmetry = MmSymmetry::General;
  else if (sym == "symmetric")
    h.symmetry = MmSymmetry::Symmetric;
  else if (sym == "skew-symmetric")
    h.symmetry = MmSymmetry::SkewSymmetric;
  else if (sym == "hermitian")
    throw ParseError(1, "hermitian matrices are not supported");
  else
    throw ParseError(1, "unsupported symmetry '" + std::string(tok[4]) + "'");

  if (h.field == MmField::Pattern && h.format == MmFormat::Array)
    throw ParseError(1, "pattern field is only valid with coordinate format");
  return h;
}

} // namespace mm_detail

/// Parses Matrix Market text. Coordinate files give CSR storage with
/// symmetric and skew-symmetric entries expanded; array files give dense
/// storage. Errors name the offending line.
inline Matrix read_matrix_market(std::istream& in, MmReadStats* stats = nullptr) {
  using namespace mm_detail;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(0, "empty input");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const MmHeader h = parse_header(line);

  // next non-comment, non-blank line is the size line
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line) || line.front() == '%') continue;
    have_size = true;
    break;
  }
  if (!have_size) throw ParseError(0, "premature end of input: missing size line");

  const auto size_tok = split(line);
  const std::size_t expected_tokens = h.format == MmFormat::Coordinate ? 3 : 2;
  if (size_tok.size() != expected_tokens)
    throw ParseError(lineno, "size line must have " + std::to_string(expected_tokens) + " integers");
  const std::size_t m = parse_index(size_tok[0], lineno, "row count");
  const std::size_t n = parse_index(size_tok[1], lineno, "column count");
  const bool symmetric_kind = h.symmetry != MmSymmetry::General;
  if (symmetric_kind && m != n) throw ParseError(lineno, "symmetric storage requires a square matrix");

  std::size_t count = 0;
  if (h.format == MmFormat::Coordinate) {
    count = parse_index(size_tok[2], lineno, "entry count");
  } else if (h.symmetry == MmSymmetry::General) {
    count = m * n;
  } else if (h.symmetry == MmSymmetry::Symmetric) {
    count = n * (n + 1) / 2;
  } else {
    count = n == 0 ? 0 : n * (n - 1) / 2;
  }

  std::vector<Triplet> entries;
  entries.reserve(h.symmetry == MmSymmetry::General ? count : 2 * count);
  DenseMatrix dense(h.format == MmFormat::Array ? m : 0, h.format == MmFormat::Array ? n : 0);
  // column-major cursor for array files
  std::size_t ai = 0, aj = 0;
  if (h.format == MmFormat::Array && h.symmetry == MmSymmetry::SkewSymmetric) ai = 1;

  std::size_t read = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line) || line.front() == '%') continue;
    if (read == count) throw ParseError(lineno, "more entries than declared");
    const auto tok = split(line);

    if (h.format == MmFormat::Array) {
      if (tok.size() != 1) throw ParseError(lineno, "array entry must be a single value");
      const double v = parse_value(tok[0], h.field, lineno);
      dense(ai, aj) = v;
      if (h.symmetry == MmSymmetry::Symmetric && ai != aj) dense(aj, ai) = v;
      if (h.symmetry == MmSymmetry::SkewSymmetric) dense(aj, ai) = -v;
      ++ai;
      if (ai == m) {
        ++aj;
        ai = h.symmetry == MmSymmetry::General ? 0 : aj + (h.symmetry == MmSymmetry::SkewSymmetric ? 1 : 0);
      }
      ++read;
      continue;
    }

    const std::size_t want = h.field == MmField::Pattern ? 2 : 3;
    if (tok.size() != want)
      throw ParseError(lineno, "coordinate entry must have " + std::to_string(want) + " fields");
    const std::size_t i = parse_index(tok[0], lineno, "row index");
    const std::size_t j = parse_index(tok[1], lineno, "column index");
    if (i < 1 || i > m || j < 1 || j > n)
      throw ParseError(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of bounds");
    const double v = h.field == MmField::Pattern ? 1.0 : parse_value(tok[2], h.field, lineno);
    if (symmetric_kind && i < j)
      throw ParseError(lineno, "symmetric storage must list only the lower triangle");
    if (h.symmetry == MmSymmetry::SkewSymmetric && i == j)
      throw ParseError(lineno, "diagonal entry in a skew-symmetric file");
    entries.push_back({i - 1, j - 1, v});
    if (symmetric_kind && i != j)
      entries.push_back({j - 1, i - 1, h.symmetry == MmSymmetry::SkewSymmetric ? -v : v});
    ++read;
  }
  if (read != count)
    throw ParseError(0, "premature end of input: expected " + std::to_string(count) + " entries, found " +
                            std::to_string(read));

  if (stats) stats->header = h;
  if (h.format == MmFormat::Array) {
    if (stats) stats->duplicates = 0;
    return Matrix(std::move(dense));
  }
  std::size_t dup = 0;
  CsrMatrix csr = CsrMatrix::from_triplets(m, n, std::move(entries), &dup);
  if (stats) stats->duplicates = dup;
  return Matrix(std::move(csr));
}

inline Matrix read_matrix_market_file(const std::string& path, MmReadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix_market(in, stats);
}

/// Sparse storage is written as coordinate/general in row-major entry order,
/// dense storage as array/general in column-major order. Values use the
/// shortest round-trip decimal form.
inline void write_matrix_market(const Matrix& a, std::ostream& out) {
  if (a.is_sparse()) {
    const auto& s = a.sparse();
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << s.rows() << ' ' << s.cols() << ' ' << s.nnz() << '\n';
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k)
        out << (i + 1) << ' ' << (s.col_idx()[k] + 1) << ' ' << format_double(s.values()[k]) << '\n';
  } else {
    const auto& d = a.dense();
    out << "%%MatrixMarket matrix array real general\n";
    out << d.rows() << ' ' << d.cols() << '\n';
    for (std::size_t j = 0; j < d.cols(); ++j)
      for (std::size_t i = 0; i < d.rows(); ++i) out << format_double(d(i, j)) << '\n';
  }
  if (!out) throw std::runtime_error("write_matrix_market: stream write failed");
}

inline void write_matrix_market_file(const Matrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_market(a, out);
}

} // namespace tsolve
