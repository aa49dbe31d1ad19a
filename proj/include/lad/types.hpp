#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lad {

// Row-major to match the on-disk and per-row access patterns; all sampled
// matrices are traversed row by row.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  dimension_mismatch,
  not_spd,
  rank_deficient,
  not_converged,
  not_near_isotropic,
  degenerate_input,
  instance_too_large,
  invalid_argument,
  io_error,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::not_spd: return "not_spd";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::not_near_isotropic: return "not_near_isotropic";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::instance_too_large: return "instance_too_large";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Compressed sparse rows; column indices strictly increasing within a row,
// stored values nonzero and finite.
class SparseRowMatrix {
 public:
  SparseRowMatrix() = default;
  SparseRowMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), row_start_(rows + 1, 0) {
    if (rows < 1 || cols < 1)
      throw Error(ErrorCode::invalid_argument, "SparseRowMatrix: rows and cols must be >= 1");
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(col_.size()); }

  // Rows must be appended in order; entries within a row in strictly
  // increasing column order.
  void append_row(const std::vector<std::pair<Index, double>>& entries) {
    if (built_rows_ >= rows_)
      throw Error(ErrorCode::invalid_argument, "SparseRowMatrix: more rows appended than declared");
    Index last = -1;
    for (const auto& [j, v] : entries) {
      if (j <= last || j >= cols_)
        throw Error(ErrorCode::invalid_argument, "SparseRowMatrix: bad column index " + std::to_string(j));
      if (v == 0.0 || !std::isfinite(v))
        throw Error(ErrorCode::invalid_argument, "SparseRowMatrix: entries must be nonzero and finite");
      col_.push_back(j);
      val_.push_back(v);
      last = j;
    }
    ++built_rows_;
    row_start_[built_rows_] = nnz();
  }

  bool complete() const { return built_rows_ == rows_; }

  Index row_begin(Index i) const { return row_start_[i]; }
  Index row_end(Index i) const { return row_start_[i + 1]; }
  Index row_nnz(Index i) const { return row_start_[i + 1] - row_start_[i]; }
  Index col_index(Index k) const { return col_[k]; }
  double value(Index k) const { return val_[k]; }

  Index max_row_nnz() const {
    Index s = 0;
    for (Index i = 0; i < rows_; ++i) s = std::max(s, row_nnz(i));
    return s;
  }

  Vector row_dense(Index i) const {
    Vector r = Vector::Zero(cols_);
    for (Index k = row_begin(i); k < row_end(i); ++k) r[col_[k]] = val_[k];
    return r;
  }

  double row_squared_norm(Index i) const {
    double s = 0.0;
    for (Index k = row_begin(i); k < row_end(i); ++k) s += val_[k] * val_[k];
    return s;
  }

  DenseMatrix to_dense() const {
    DenseMatrix m = DenseMatrix::Zero(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = row_begin(i); k < row_end(i); ++k) m(i, col_[k]) = val_[k];
    return m;
  }

  static SparseRowMatrix from_dense(const DenseMatrix& m, double drop_tol = 0.0) {
    SparseRowMatrix s(m.rows(), m.cols());
    std::vector<std::pair<Index, double>> row;
    for (Index i = 0; i < m.rows(); ++i) {
      row.clear();
      for (Index j = 0; j < m.cols(); ++j)
        if (std::abs(m(i, j)) > drop_tol) row.emplace_back(j, m(i, j));
      s.append_row(row);
    }
    return s;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index built_rows_ = 0;
  std::vector<Index> row_start_;
  std::vector<Index> col_;
  std::vector<double> val_;
};

// The regression pair (A, b). A is held dense or sparse; b always dense.
struct ProblemInstance {
  DenseMatrix A_dense;
  SparseRowMatrix A_sparse;
  bool sparse = false;
  Vector b;
  // Set by generators for consistent instances (b = A z).
  std::vector<double> planted_solution;

  Index rows() const { return sparse ? A_sparse.rows() : A_dense.rows(); }
  Index cols() const { return sparse ? A_sparse.cols() : A_dense.cols(); }
  Index nnz() const {
    if (sparse) return A_sparse.nnz();
    Index c = 0;
    for (Index i = 0; i < A_dense.rows(); ++i)
      for (Index j = 0; j < A_dense.cols(); ++j)
        if (A_dense(i, j) != 0.0) ++c;
    return c;
  }
  DenseMatrix dense() const { return sparse ? A_sparse.to_dense() : A_dense; }
};

inline void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::invalid_argument, std::string(what) + ": entries must be finite");
}

inline void check_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::invalid_argument, std::string(what) + ": entries must be finite");
}

}  // namespace lad
