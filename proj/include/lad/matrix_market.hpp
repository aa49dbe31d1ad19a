#pragma once

#include "lad/types.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace lad {

namespace detail {

[[noreturn]] inline void io_fail(const std::string& path, long line, const std::string& what) {
  throw Error(ErrorCode::io_error, path + ":" + std::to_string(line) + ": " + what);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// 17 significant digits round-trip an IEEE double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MmHeader {
  bool coordinate = false;  // else array
};

inline MmHeader parse_mm_header(const std::string& path, const std::string& first_line) {
  std::istringstream ss(first_line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") io_fail(path, 1, "missing %%MatrixMarket banner");
  if (lower(object) != "matrix") io_fail(path, 1, "unsupported object '" + object + "' (only 'matrix')");
  MmHeader h;
  const std::string fmt = lower(format);
  if (fmt == "coordinate") h.coordinate = true;
  else if (fmt == "array") h.coordinate = false;
  else io_fail(path, 1, "unsupported format '" + format + "' (coordinate or array)");
  if (lower(field) != "real" && lower(field) != "integer")
    io_fail(path, 1, "unsupported field '" + field + "' (only real/integer)");
  if (lower(symmetry) != "general") io_fail(path, 1, "unsupported symmetry '" + symmetry + "' (only general)");
  return h;
}

inline bool next_content_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;   // blank
    if (line[i] == '%') continue;           // comment
    return true;
  }
  return false;
}

}  // namespace detail

struct LoadedMatrix {
  bool is_sparse = false;
  DenseMatrix dense;
  SparseRowMatrix sparse;

  Index rows() const { return is_sparse ? sparse.rows() : dense.rows(); }
  Index cols() const { return is_sparse ? sparse.cols() : dense.cols(); }
};

// Matrix Market reader: coordinate files become SparseRowMatrix (duplicate
// entries summed, per the format convention), array files become DenseMatrix.
inline LoadedMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, path + ": cannot open for reading");
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) detail::io_fail(path, 1, "empty file");
  ++line_no;
  const detail::MmHeader header = detail::parse_mm_header(path, line);

  if (!detail::next_content_line(in, line, line_no)) detail::io_fail(path, line_no, "missing size line");

  LoadedMatrix out;
  if (header.coordinate) {
    long n = 0, m = 0, nnz = 0;
    {
      std::istringstream ss(line);
      if (!(ss >> n >> m >> nnz) || n < 1 || m < 1 || nnz < 0)
        detail::io_fail(path, line_no, "malformed coordinate size line '" + line + "'");
    }
    std::vector<std::tuple<Index, Index, double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
      if (!detail::next_content_line(in, line, line_no))
        detail::io_fail(path, line_no, "expected " + std::to_string(nnz) + " entries, file ended after " + std::to_string(k));
      std::istringstream ss(line);
      long i = 0, j = 0;
      double v = 0.0;
      if (!(ss >> i >> j >> v)) detail::io_fail(path, line_no, "malformed entry '" + line + "'");
      if (i < 1 || i > n || j < 1 || j > m)
        detail::io_fail(path, line_no, "entry index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
      if (!std::isfinite(v)) detail::io_fail(path, line_no, "non-finite value");
      triplets.emplace_back(i - 1, j - 1, v);
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b)); });
    out.is_sparse = true;
    out.sparse = SparseRowMatrix(n, m);
    std::vector<std::pair<Index, double>> row_entries;
    std::size_t k = 0;
    for (Index r = 0; r < n; ++r) {
      row_entries.clear();
      while (k < triplets.size() && std::get<0>(triplets[k]) == r) {
        const Index c = std::get<1>(triplets[k]);
        double v = 0.0;
        while (k < triplets.size() && std::get<0>(triplets[k]) == r && std::get<1>(triplets[k]) == c) {
          v += std::get<2>(triplets[k]);  // duplicates summed
          ++k;
        }
        if (v != 0.0) row_entries.emplace_back(c, v);
      }
      out.sparse.append_row(row_entries);
    }
  } else {
    long n = 0, m = 0;
    {
      std::istringstream ss(line);
      if (!(ss >> n >> m) || n < 1 || m < 1)
        detail::io_fail(path, line_no, "malformed array size line '" + line + "'");
    }
    out.is_sparse = false;
    out.dense.resize(n, m);
    // Array format stores entries column-major, one value per line.
    for (long j = 0; j < m; ++j)
      for (long i = 0; i < n; ++i) {
        if (!detail::next_content_line(in, line, line_no))
          detail::io_fail(path, line_no, "array data ended early (expected " + std::to_string(n * m) + " values)");
        std::istringstream ss(line);
        double v = 0.0;
        if (!(ss >> v)) detail::io_fail(path, line_no, "malformed value '" + line + "'");
        if (!std::isfinite(v)) detail::io_fail(path, line_no, "non-finite value");
        out.dense(i, j) = v;
      }
  }
  return out;
}

// Right-hand side: either a one-column Matrix Market array file or plain
// text with one value per line ('%' comments and blanks skipped).
inline Vector read_rhs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, path + ": cannot open for reading");
  std::string first;
  if (!std::getline(in, first)) throw Error(ErrorCode::io_error, path + ":1: empty file");

  if (first.rfind("%%MatrixMarket", 0) == 0) {
    in.close();
    LoadedMatrix m = read_matrix_market(path);
    if (m.is_sparse || m.dense.cols() != 1)
      throw Error(ErrorCode::io_error, path + ": right-hand side must be a one-column array file");
    return m.dense.col(0);
  }

  std::vector<double> values;
  long line_no = 0;
  std::string line = first;
  // Re-scan from the top including the first line.
  auto consume = [&](const std::string& text, long no) {
    std::size_t i = text.find_first_not_of(" \t\r");
    if (i == std::string::npos || text[i] == '%') return;
    std::istringstream ss(text);
    double v = 0.0;
    if (!(ss >> v)) detail::io_fail(path, no, "malformed value '" + text + "'");
    std::string rest;
    if (ss >> rest) detail::io_fail(path, no, "trailing content '" + rest + "'");
    if (!std::isfinite(v)) detail::io_fail(path, no, "non-finite value");
    values.push_back(v);
  };
  consume(line, ++line_no);
  while (std::getline(in, line)) consume(line, ++line_no);
  if (values.empty()) throw Error(ErrorCode::io_error, path + ": no values found");
  Vector b(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) b[static_cast<Index>(i)] = values[i];
  return b;
}

inline void write_matrix_market(const std::string& path, const DenseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, path + ": cannot open for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << A.rows() << " " << A.cols() << "\n";
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) out << detail::format_double(A(i, j)) << "\n";
  if (!out) throw Error(ErrorCode::io_error, path + ": write failed");
}

inline void write_matrix_market(const std::string& path, const SparseRowMatrix& A) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, path + ": cannot open for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
  for (Index i = 0; i < A.rows(); ++i)
    for (Index k = A.row_begin(i); k < A.row_end(i); ++k)
      out << (i + 1) << " " << (A.col_index(k) + 1) << " " << detail::format_double(A.value(k)) << "\n";
  if (!out) throw Error(ErrorCode::io_error, path + ": write failed");
}

inline void write_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, path + ": cannot open for writing");
  for (Index i = 0; i < v.size(); ++i) out << detail::format_double(v[i]) << "\n";
  if (!out) throw Error(ErrorCode::io_error, path + ": write failed");
}

// File ingestion with the matrix/rhs dimension cross-check; sparse inputs
// stay sparse.
inline ProblemInstance ingest(const std::string& matrix_path, const std::string& rhs_path) {
  LoadedMatrix m = read_matrix_market(matrix_path);
  Vector b = read_rhs(rhs_path);
  if (m.rows() != b.size())
    throw Error(ErrorCode::dimension_mismatch,
                "ingest: matrix has " + std::to_string(m.rows()) + " rows but rhs has " +
                    std::to_string(b.size()) + " values");
  ProblemInstance inst;
  inst.sparse = m.is_sparse;
  if (m.is_sparse) inst.A_sparse = std::move(m.sparse);
  else inst.A_dense = std::move(m.dense);
  inst.b = std::move(b);
  return inst;
}

}  // namespace lad
