#pragma once

#include "lad/precondition.hpp"
#include "lad/types.hpp"

#include <cmath>
#include <utility>

namespace lad {

// Huber envelope of |t|: quadratic t^2/(2 beta) inside |t| <= beta, linear
// |t| - beta/2 outside. Sandwich: value <= |t| <= value + beta/2, and the
// derivative is 1/beta-Lipschitz with |derivative| <= 1.
inline std::pair<double, double> huber_value_grad(double t, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "huber_value_grad: beta must be > 0");
  const double a = std::abs(t);
  if (a <= beta) return {t * t / (2.0 * beta), t / beta};
  return {a - beta / 2.0, t > 0.0 ? 1.0 : -1.0};
}

// F(x) = sum_i c_i huber_beta(a~_i^T x - b~_i) + (sigma/2) ||x - center||^2
// over the counted rows of a preconditioned problem. The stochastic
// component with index i (drawn with probability c_i/N) is
// f_i(x) = N huber_beta(a~_i^T x - b~_i); the proximal term is kept separate
// so solvers can handle it in closed form.
//
// Each f_i is (N ||a~_i||^2 / beta)-smooth; with the proximal term the total
// objective is sigma-strongly convex and (N max_i ||a~_i||^2 / beta + sigma)-
// smooth, which is what `smoothness()` reports.
struct SmoothedObjective {
  const PreconditionedProblem* problem = nullptr;
  double beta = 0.0;
  Vector center;
  double sigma = 0.0;

  SmoothedObjective(const PreconditionedProblem& P, double beta_, Vector center_, double sigma_)
      : problem(&P), beta(beta_), center(std::move(center_)), sigma(sigma_) {
    if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "SmoothedObjective: beta must be > 0");
    if (sigma < 0.0) throw Error(ErrorCode::invalid_argument, "SmoothedObjective: sigma must be >= 0");
    if (center.size() != P.d) throw Error(ErrorCode::dimension_mismatch, "SmoothedObjective: center has wrong length");
  }

  Index components() const { return problem->unique_rows(); }
  std::int64_t expanded_count() const { return problem->N; }

  double smoothness() const {
    double max_sq = 0.0;
    for (Index i = 0; i < problem->A_tilde_U.rows(); ++i)
      max_sq = std::max(max_sq, problem->A_tilde_U.row(i).squaredNorm());
    return static_cast<double>(problem->N) * max_sq / beta + sigma;
  }

  double value(const Vector& x) const {
    double s = 0.0;
    for (Index i = 0; i < problem->A_tilde_U.rows(); ++i) {
      const double r = problem->A_tilde_U.row(i).dot(x) - problem->b_tilde[i];
      s += static_cast<double>(problem->counts[i]) * huber_value_grad(r, beta).first;
    }
    return s + 0.5 * sigma * (x - center).squaredNorm();
  }

  // Gradient of the smooth part only (no proximal term), accumulated over
  // counted rows; one call costs one full pass.
  Vector smooth_gradient(const Vector& x) const {
    Vector g = Vector::Zero(problem->d);
    for (Index i = 0; i < problem->A_tilde_U.rows(); ++i) {
      const double r = problem->A_tilde_U.row(i).dot(x) - problem->b_tilde[i];
      g += static_cast<double>(problem->counts[i]) * huber_value_grad(r, beta).second *
           problem->A_tilde_U.row(i).transpose();
    }
    return g;
  }

  Vector full_gradient(const Vector& x) const { return smooth_gradient(x) + sigma * (x - center); }

  // Stochastic component gradient: component i with sampling weight c_i/N.
  Vector component_gradient(Index i, const Vector& x) const {
    const double r = problem->A_tilde_U.row(i).dot(x) - problem->b_tilde[i];
    return static_cast<double>(problem->N) * huber_value_grad(r, beta).second *
           problem->A_tilde_U.row(i).transpose();
  }

  // l1 value of the unsmoothed counted objective; the smoothing gap obeys
  // 0 <= l1 - smooth part <= N * beta / 2.
  double unsmoothed_l1(const Vector& x) const { return problem->objective_l1(x); }
};

}  // namespace lad
