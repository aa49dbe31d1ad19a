#pragma once

#include "lad/types.hpp"

#include <Eigen/Cholesky>

namespace lad {

// A^T A, re-symmetrized to suppress round-off drift. Products are naive;
// at d this small there is nothing to gain from blocked or Strassen-style
// multiplies.
inline DenseMatrix gram(const DenseMatrix& A) {
  DenseMatrix g = A.transpose() * A;
  g = 0.5 * (g + g.transpose()).eval();
  return g;
}

inline DenseMatrix gram(const SparseRowMatrix& A) {
  const Index d = A.cols();
  DenseMatrix g = DenseMatrix::Zero(d, d);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index k = A.row_begin(i); k < A.row_end(i); ++k)
      for (Index l = A.row_begin(i); l < A.row_end(i); ++l)
        g(A.col_index(k), A.col_index(l)) += A.value(k) * A.value(l);
  g = 0.5 * (g + g.transpose()).eval();
  return g;
}

namespace detail {
inline Eigen::LLT<Eigen::MatrixXd> llt_or_throw(const DenseMatrix& M, const char* what) {
  if (M.rows() != M.cols())
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::not_spd, std::string(what) + ": matrix is not positive definite (rank or conditioning failure)");
  return llt;
}
}  // namespace detail

// Solve M z = y for symmetric positive definite M via Cholesky.
inline Vector spd_solve(const DenseMatrix& M, const Vector& y) {
  if (M.rows() != y.size())
    throw Error(ErrorCode::dimension_mismatch, "spd_solve: size mismatch");
  auto llt = detail::llt_or_throw(M, "spd_solve");
  return llt.solve(y);
}

// Upper-triangular U with U^T U = M^{-1}, computed as the transpose of the
// Cholesky factor of M^{-1}. Note the isotropy transform built from this is
// A -> A U^T (equivalently: rotate with the lower factor of M^{-1}), since
// (A U^T)^T (A U^T) = U M U^T = I.
inline DenseMatrix inv_factor(const DenseMatrix& M) {
  auto llt = detail::llt_or_throw(M, "inv_factor");
  const Index d = M.rows();
  DenseMatrix Minv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  Minv = 0.5 * (Minv + Minv.transpose()).eval();
  auto llt_inv = detail::llt_or_throw(Minv, "inv_factor");
  DenseMatrix L = llt_inv.matrixL();
  return L.transpose();
}

inline Vector matvec(const DenseMatrix& A, const Vector& x) {
  if (A.cols() != x.size())
    throw Error(ErrorCode::dimension_mismatch, "matvec: size mismatch");
  return A * x;
}

inline Vector matvec(const SparseRowMatrix& A, const Vector& x) {
  if (A.cols() != x.size())
    throw Error(ErrorCode::dimension_mismatch, "matvec: size mismatch");
  Vector y = Vector::Zero(A.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (Index k = A.row_begin(i); k < A.row_end(i); ++k) s += A.value(k) * x[A.col_index(k)];
    y[i] = s;
  }
  return y;
}

inline Vector transpose_matvec(const DenseMatrix& A, const Vector& v) {
  if (A.rows() != v.size())
    throw Error(ErrorCode::dimension_mismatch, "transpose_matvec: size mismatch");
  return A.transpose() * v;
}

inline Vector transpose_matvec(const SparseRowMatrix& A, const Vector& v) {
  if (A.rows() != v.size())
    throw Error(ErrorCode::dimension_mismatch, "transpose_matvec: size mismatch");
  Vector y = Vector::Zero(A.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index k = A.row_begin(i); k < A.row_end(i); ++k) y[A.col_index(k)] += A.value(k) * v[i];
  return y;
}

inline double l1_norm(const Vector& v) { return v.lpNorm<1>(); }

// Condition number of a symmetric PSD matrix, from its eigenvalue range.
inline double symmetric_condition_number(const DenseMatrix& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace lad
