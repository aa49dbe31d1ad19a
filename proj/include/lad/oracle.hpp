#pragma once

#include "lad/linalg.hpp"
#include "lad/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace lad {

enum class OracleMethod { subset_enumeration, median };

struct OracleResult {
  Vector x_star;
  double f_star = 0.0;
  std::vector<Index> active_rows;  // rows with (numerically) zero residual
  OracleMethod method = OracleMethod::subset_enumeration;
  std::int64_t subsets_examined = 0;
};

namespace detail {

inline std::int64_t binomial_count(Index n, Index d, std::int64_t cap) {
  // C(n, d) with early exit once the count exceeds cap.
  double c = 1.0;
  for (Index j = 1; j <= d; ++j) {
    c *= static_cast<double>(n - d + j) / static_cast<double>(j);
    if (c > 2.0 * static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::int64_t>(std::llround(c));
}

}  // namespace detail

// Exact weighted l1 regression by enumeration. Some minimizer of
// sum_i w_i |a_i^T x - b_i| interpolates d linearly independent rows, so
// trying every d-subset and solving the square system finds the optimum.
// Intended for test-scale instances; refuses to enumerate more than
// `max_subsets` subsets. Ties keep the lexicographically smallest subset
// (the enumeration order), so results are reproducible.
inline OracleResult exact_l1_small(const DenseMatrix& A, const Vector& b,
                                   const Vector* weights = nullptr,
                                   std::int64_t max_subsets = 5'000'000) {
  const Index n = A.rows();
  const Index d = A.cols();
  if (n != b.size()) throw Error(ErrorCode::dimension_mismatch, "exact_l1_small: A and b row counts differ");
  if (weights && weights->size() != n)
    throw Error(ErrorCode::dimension_mismatch, "exact_l1_small: weight vector has wrong length");
  if (n < d) throw Error(ErrorCode::rank_deficient, "exact_l1_small: fewer rows than columns");
  if (detail::binomial_count(n, d, max_subsets) > max_subsets)
    throw Error(ErrorCode::instance_too_large, "exact_l1_small: too many row subsets to enumerate");

  const auto weight = [&](Index i) { return weights ? (*weights)[i] : 1.0; };
  const auto objective = [&](const Vector& x) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += weight(i) * std::abs(A.row(i).dot(x) - b[i]);
    return s;
  };

  std::vector<Index> idx(d);
  for (Index j = 0; j < d; ++j) idx[j] = j;

  bool found = false;
  OracleResult best;
  best.method = OracleMethod::subset_enumeration;
  DenseMatrix S(d, d);
  Vector rhs(d);
  std::int64_t examined = 0;

  while (true) {
    ++examined;
    for (Index j = 0; j < d; ++j) {
      S.row(j) = A.row(idx[j]);
      rhs[j] = b[idx[j]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (lu.rank() == d) {
      Vector x = lu.solve(rhs);
      const double f = objective(x);
      // Strictly-better test with a round-off guard keeps the earliest
      // (lexicographically smallest) subset among ties.
      if (!found || f < best.f_star - 1e-12 * (1.0 + std::abs(best.f_star))) {
        found = true;
        best.x_star = x;
        best.f_star = f;
      }
    }

    // Next d-combination of {0, ..., n-1} in lexicographic order.
    Index j = d - 1;
    while (j >= 0 && idx[j] == j + n - d) --j;
    if (j < 0) break;
    ++idx[j];
    for (Index k = j + 1; k < d; ++k) idx[k] = idx[k - 1] + 1;
  }

  if (!found)
    throw Error(ErrorCode::degenerate_input, "exact_l1_small: every row subset was singular");
  best.subsets_examined = examined;
  best.f_star = objective(best.x_star);  // recomputed so the pair is consistent
  const double active_tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());
  for (Index i = 0; i < n; ++i)
    if (std::abs(A.row(i).dot(best.x_star) - b[i]) <= active_tol) best.active_rows.push_back(i);
  return best;
}

// Exact l2 minimizer (A^T A)^{-1} A^T b via the normal equations, optionally
// row-weighted. The residual is A^T-orthogonal up to round-off.
inline Vector exact_l2(const DenseMatrix& A, const Vector& b, const Vector* weights = nullptr) {
  const Index n = A.rows();
  const Index d = A.cols();
  if (n != b.size()) throw Error(ErrorCode::dimension_mismatch, "exact_l2: A and b row counts differ");
  if (weights && weights->size() != n)
    throw Error(ErrorCode::dimension_mismatch, "exact_l2: weight vector has wrong length");

  DenseMatrix g = DenseMatrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    g += w * A.row(i).transpose() * A.row(i);
    rhs += w * b[i] * A.row(i).transpose();
  }
  g = 0.5 * (g + g.transpose()).eval();
  return spd_solve(g, rhs);
}

}  // namespace lad
