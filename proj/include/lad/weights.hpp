#pragma once

#include "lad/linalg.hpp"
#include "lad/types.hpp"

#include <algorithm>
#include <cmath>

namespace lad {

enum class WeightKind { leverage, lewis, sampling };

struct WeightVector {
  Vector values;
  WeightKind kind;
};

// Rows that are identically zero get this floor so diag(w)^{-1} stays
// invertible; they can never be sampled with meaningful probability.
inline constexpr double kZeroRowWeightFloor = 1e-12;

namespace detail {

// tau_i = a_i (A^T D A)^{-1} a_i^T for all rows, via one Cholesky of the
// weighted Gram and one triangular solve per row. D is a per-row scaling
// of the Gram (identity for plain leverage scores).
template <typename Matrix>
Vector scaled_leverage(const Matrix& A, const Vector* inv_row_scale) {
  const Index n = A.rows();
  const Index d = A.cols();
  DenseMatrix M = DenseMatrix::Zero(d, d);
  if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
    if (inv_row_scale == nullptr) {
      M = gram(A);
    } else {
      M = A.transpose() * inv_row_scale->asDiagonal() * A;
      M = 0.5 * (M + M.transpose()).eval();
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const double s = inv_row_scale ? (*inv_row_scale)[i] : 1.0;
      for (Index k = A.row_begin(i); k < A.row_end(i); ++k)
        for (Index l = A.row_begin(i); l < A.row_end(i); ++l)
          M(A.col_index(k), A.col_index(l)) += s * A.value(k) * A.value(l);
    }
    M = 0.5 * (M + M.transpose()).eval();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::rank_deficient, "leverage computation: Gram matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  Vector tau(n);
  Vector row(d);
  for (Index i = 0; i < n; ++i) {
    if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
      row = A.row(i).transpose();
    } else {
      row = A.row_dense(i);
    }
    // tau_i = || L^{-1} a_i ||^2
    Vector z = L.triangularView<Eigen::Lower>().solve(row);
    tau[i] = z.squaredNorm();
  }
  return tau;
}

}  // namespace detail

template <typename Matrix>
WeightVector leverage_scores(const Matrix& A) {
  Vector tau = detail::scaled_leverage(A, nullptr);
  return {tau, WeightKind::leverage};
}

struct LewisOptions {
  int max_iters = 30;
  double tol = 1e-4;
};

struct LewisResult {
  WeightVector weights;
  int iterations = 0;
  double fixed_point_residual = 0.0;  // max_i |w_i^2 - a_i (A^T W^{-1} A)^{-1} a_i^T| / w_i^2
  bool converged = false;
};

// Fixed-point iteration w <- sqrt(diag(A (A^T W^{-1} A)^{-1} A^T)), started
// from the leverage scores. Converges geometrically for the unique positive
// fixed point.
template <typename Matrix>
LewisResult lewis_weights_full(const Matrix& A, const LewisOptions& opt = {}) {
  if (opt.max_iters < 1) throw Error(ErrorCode::invalid_argument, "lewis_weights: max_iters must be >= 1");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "lewis_weights: tol must be > 0");
  const Index n = A.rows();

  std::vector<char> zero_row(n, 0);
  for (Index i = 0; i < n; ++i) {
    double s;
    if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
      s = A.row(i).squaredNorm();
    } else {
      s = A.row_squared_norm(i);
    }
    zero_row[i] = (s == 0.0);
  }

  Vector w = leverage_scores(A).values;
  for (Index i = 0; i < n; ++i)
    if (zero_row[i] || w[i] < kZeroRowWeightFloor) w[i] = kZeroRowWeightFloor;

  LewisResult res;
  Vector inv_w(n);
  for (int it = 1; it <= opt.max_iters; ++it) {
    for (Index i = 0; i < n; ++i) inv_w[i] = 1.0 / w[i];
    Vector q = detail::scaled_leverage(A, &inv_w);  // q_i = a_i (A^T W^{-1} A)^{-1} a_i^T
    double max_rel_step = 0.0;
    for (Index i = 0; i < n; ++i) {
      double w_new = zero_row[i] ? kZeroRowWeightFloor : std::sqrt(std::max(q[i], 0.0));
      if (w_new < kZeroRowWeightFloor) w_new = kZeroRowWeightFloor;
      if (!zero_row[i]) max_rel_step = std::max(max_rel_step, std::abs(w_new / w[i] - 1.0));
      w[i] = w_new;
    }
    res.iterations = it;
    if (max_rel_step <= opt.tol) {
      res.converged = true;
      break;
    }
  }

  // Residual against the defining equations; zero rows are excluded since
  // their floored weight is arbitrary.
  for (Index i = 0; i < n; ++i) inv_w[i] = 1.0 / w[i];
  Vector q = detail::scaled_leverage(A, &inv_w);
  double resid = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (zero_row[i]) continue;
    resid = std::max(resid, std::abs(w[i] * w[i] - q[i]) / (w[i] * w[i]));
  }
  res.fixed_point_residual = resid;
  res.weights = {w, WeightKind::lewis};

  if (!res.converged && resid > 10.0 * opt.tol)
    throw Error(ErrorCode::not_converged,
                "lewis_weights: no convergence after " + std::to_string(opt.max_iters) +
                    " iterations (residual " + std::to_string(resid) + ")");
  return res;
}

template <typename Matrix>
WeightVector lewis_weights(const Matrix& A, int max_iters = 30, double tol = 1e-4) {
  return lewis_weights_full(A, LewisOptions{max_iters, tol}).weights;
}

// p_i = w_i * h with h = c_sample * eps^{-2} * ln(max(n, 3)), so the expected
// sample size is sum(w) * h.
inline WeightVector sampling_values(const WeightVector& w, Index n, double eps, double c_sample) {
  if (w.kind != WeightKind::lewis)
    throw Error(ErrorCode::invalid_argument, "sampling_values: expects Lewis weights");
  if (!(eps > 0.0 && eps <= 1.0))
    throw Error(ErrorCode::invalid_argument, "sampling_values: eps must lie in (0, 1]");
  if (!(c_sample > 0.0))
    throw Error(ErrorCode::invalid_argument, "sampling_values: c_sample must be > 0");
  const double h = c_sample / (eps * eps) * std::log(static_cast<double>(std::max<Index>(n, 3)));
  return {w.values * h, WeightKind::sampling};
}

}  // namespace lad
