#pragma once

#include "lad/linalg.hpp"
#include "lad/precondition.hpp"
#include "lad/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace lad {

// Bracket for the optimal l1 objective value derived from the l2 residual:
// f2 <= f*_l1 <= sqrt(n) f2, covered by a geometric ladder of guesses.
struct ObjectiveBracket {
  double f2 = 0.0;
  double lower = 0.0;               // = f2
  double upper = 0.0;               // = sqrt(n) * f2
  std::vector<double> guesses;      // f2 * 2^i, i = 0 .. ceil(log2 sqrt(n)) + 1
  double zero_tol = 0.0;
  bool exact_fit = false;           // f2 <= zero_tol: the l2 minimizer already fits
};

inline double default_zero_tol(double b_norm2) { return 1e-12 * (1.0 + b_norm2); }

// Warm start for an exactly isotropic problem: with (A~U)^T(A~U) = I the l2
// minimizer is simply (A~U)^T b~, accumulated over counted rows.
inline Vector init_isotropic(const PreconditionedProblem& P) {
  if (P.mode != PreconditionMode::lewis)
    throw Error(ErrorCode::invalid_argument, "init_isotropic: requires an exactly isotropic (lewis-mode) problem");
  return P.transpose_apply_counted(P.b_tilde);
}

namespace detail {

// Conjugate gradient on the normal equations G x = rhs with G applied
// matrix-free; `apply_gram` must compute G p for the (possibly counted and
// weighted) row set. Stops on relative rhs-residual <= delta.
template <typename ApplyGram>
Vector cg_normal_equations(const ApplyGram& apply_gram, const Vector& rhs, double delta, int max_iters,
                           const char* who) {
  Vector x = Vector::Zero(rhs.size());
  Vector r = rhs;
  Vector p = r;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return x;
  double rs = r.squaredNorm();
  const double target = delta * rhs_norm;
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rs) <= target) return x;
    Vector gp = apply_gram(p);
    const double denom = p.dot(gp);
    if (!(denom > 0.0))
      throw Error(ErrorCode::rank_deficient, std::string(who) + ": curvature vanished, matrix not positive definite");
    const double alpha = rs / denom;
    x += alpha * p;
    r -= alpha * gp;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (std::sqrt(rs) <= target) return x;
  throw Error(ErrorCode::not_converged,
              std::string(who) + ": iteration cap hit with relative residual " + std::to_string(std::sqrt(rs) / rhs_norm) +
                  " above target " + std::to_string(delta));
}

inline double cg_delta(double eps_cg, double cond_hat, double n) {
  // Guarded stopping tolerance: the error bound degrades with the condition
  // number and a polynomial in n, so the residual test over-delivers.
  const double c_guard = 2.0;
  return std::max(eps_cg / (cond_hat * std::pow(n, c_guard)), 1e-13);
}

inline int cg_default_iters(double cond_hat, double delta) {
  return static_cast<int>(std::ceil(std::sqrt(cond_hat) * std::log(2.0 / delta))) + 10;
}

}  // namespace detail

// Approximate l2 minimizer by conjugate gradient on A^T A x = A^T b, valid
// when the input is near-isotropic (Gram condition number <= 100, checked).
// Guarantees ||x - x0||_2 <= eps_cg * ||A x0 - b||_2 against the exact
// minimizer x0.
template <typename Matrix>
Vector init_cg(const Matrix& A, const Vector& b, double eps_cg, int max_iters = 0) {
  if (A.rows() != b.size()) throw Error(ErrorCode::dimension_mismatch, "init_cg: A and b row counts differ");
  if (!(eps_cg > 0.0)) throw Error(ErrorCode::invalid_argument, "init_cg: eps_cg must be > 0");
  const DenseMatrix G = gram(A);
  const double cond_hat = symmetric_condition_number(G);
  if (!(cond_hat <= 100.0))
    throw Error(ErrorCode::not_near_isotropic,
                "init_cg: Gram condition number " + std::to_string(cond_hat) + " exceeds 100");
  const Vector rhs = transpose_matvec(A, b);
  const double delta = detail::cg_delta(eps_cg, cond_hat, static_cast<double>(A.rows()));
  const int iters = max_iters > 0 ? max_iters : detail::cg_default_iters(cond_hat, delta);
  const auto apply = [&](const Vector& p) { return transpose_matvec(A, matvec(A, p)); };
  return detail::cg_normal_equations(apply, rhs, delta, iters, "init_cg");
}

// Counted-row variant used after uniform sampling: minimizes
// sum_i c_i (a~_i^T x - b~_i)^2 without expanding multiplicities.
inline Vector init_cg(const PreconditionedProblem& P, double eps_cg, int max_iters = 0) {
  if (!(eps_cg > 0.0)) throw Error(ErrorCode::invalid_argument, "init_cg: eps_cg must be > 0");
  const DenseMatrix G = P.counted_gram();
  const double cond_hat = symmetric_condition_number(G);
  if (!(cond_hat <= 100.0))
    throw Error(ErrorCode::not_near_isotropic,
                "init_cg: counted Gram condition number " + std::to_string(cond_hat) + " exceeds 100");
  const Vector rhs = P.transpose_apply_counted(P.b_tilde);
  const double delta = detail::cg_delta(eps_cg, cond_hat, static_cast<double>(P.N));
  const int iters = max_iters > 0 ? max_iters : detail::cg_default_iters(cond_hat, delta);
  const auto apply = [&](const Vector& p) { return G * p; };  // d x d product; G already assembled
  return detail::cg_normal_equations(apply, rhs, delta, iters, "init_cg");
}

namespace detail {

inline ObjectiveBracket bracket_from_f2(double f2, double n_rows, double b_norm2) {
  ObjectiveBracket br;
  br.f2 = f2;
  br.lower = f2;
  br.upper = std::sqrt(n_rows) * f2;
  br.zero_tol = default_zero_tol(b_norm2);
  br.exact_fit = f2 <= br.zero_tol;
  const int i_max = static_cast<int>(std::ceil(0.5 * std::log2(std::max(n_rows, 1.0)))) + 1;
  double g = f2;
  for (int i = 0; i <= i_max; ++i, g *= 2.0) br.guesses.push_back(g);
  return br;
}

}  // namespace detail

// f2 = ||A x_l2 - b||_2 brackets the optimal l1 value within [f2, sqrt(n) f2];
// the guesses cover that interval geometrically with ratio 2.
template <typename Matrix>
ObjectiveBracket objective_bracket(const Matrix& A, const Vector& b, const Vector& x_l2) {
  if (A.rows() != b.size() || A.cols() != x_l2.size())
    throw Error(ErrorCode::dimension_mismatch, "objective_bracket: dimensions do not conform");
  const double f2 = (matvec(A, x_l2) - b).norm();
  return detail::bracket_from_f2(f2, static_cast<double>(A.rows()), b.norm());
}

// Counted-row variant: n is the expanded row count N.
inline ObjectiveBracket objective_bracket(const PreconditionedProblem& P, const Vector& x_l2) {
  if (x_l2.size() != P.d) throw Error(ErrorCode::dimension_mismatch, "objective_bracket: wrong solution length");
  const double f2 = P.objective_l2(x_l2);
  double b_sq = 0.0;
  for (Index i = 0; i < P.b_tilde.size(); ++i)
    b_sq += static_cast<double>(P.counts[i]) * P.b_tilde[i] * P.b_tilde[i];
  return detail::bracket_from_f2(f2, static_cast<double>(P.N), std::sqrt(b_sq));
}

}  // namespace lad
