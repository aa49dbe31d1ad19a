#pragma once

#include "lad/precondition.hpp"
#include "lad/types.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace lad {

struct SgdConfig {
  double R = 0.0;            // radius of the projection ball around x0
  double L_grad = 0.0;       // upper bound on the stochastic subgradient norm
  std::int64_t T = 0;        // step count; step size is R / (L_grad sqrt(T))
  std::uint64_t seed = 0;
  // When > 0, debug builds assert ||g||^2 <= row_bound_sq for every sampled
  // subgradient (the isotropic row bound makes this C_row * N * d).
  double row_bound_sq = 0.0;
  std::int64_t trace_every = 0;  // 0 = off; else evaluate the average every so many steps
};

struct SgdStats {
  std::int64_t grad_evals = 0;
  // (cumulative component-gradient evaluations, counted l1 objective of the
  // averaged iterate at that point)
  std::vector<std::pair<std::int64_t, double>> trace;
};

// Projected stochastic subgradient descent on the counted l1 objective
// sum_i c_i |a~_i^T x - b~_i|. Each step samples a unique row with
// probability c_i / N, steps along N sign(r_i) a~_i, and projects back onto
// the ball B(x0, R). Returns the uniform average of the post-step iterates;
// the expected gap after T steps is O(R L / sqrt(T)).
inline Vector sgd_solve(const PreconditionedProblem& P, const Vector& x0, const SgdConfig& cfg,
                        SgdStats* stats = nullptr) {
  if (x0.size() != P.d) throw Error(ErrorCode::dimension_mismatch, "sgd_solve: x0 has wrong length");
  if (!(cfg.R > 0.0) || !(cfg.L_grad > 0.0) || cfg.T < 1)
    throw Error(ErrorCode::invalid_argument, "sgd_solve: need R > 0, L_grad > 0, T >= 1");

  const Index m = P.unique_rows();
  const double N = static_cast<double>(P.N);
  std::vector<double> count_weights(m);
  for (Index i = 0; i < m; ++i) count_weights[i] = static_cast<double>(P.counts[i]);

  std::mt19937_64 rng(cfg.seed);
  std::discrete_distribution<Index> pick(count_weights.begin(), count_weights.end());

  const double eta = cfg.R / (cfg.L_grad * std::sqrt(static_cast<double>(cfg.T)));

#ifndef NDEBUG
  std::vector<double> row_sq(m);
  for (Index i = 0; i < m; ++i) row_sq[i] = P.A_tilde_U.row(i).squaredNorm();
#endif

  Vector x = x0;
  Vector avg = Vector::Zero(P.d);
  for (std::int64_t t = 1; t <= cfg.T; ++t) {
    const Index i = pick(rng);
    const double r = P.A_tilde_U.row(i).dot(x) - P.b_tilde[i];
    // sign(0) := 0, a valid subgradient that keeps zero-residual points fixed.
    const double s = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    assert(cfg.row_bound_sq <= 0.0 || s == 0.0 ||
           N * N * row_sq[i] <= cfg.row_bound_sq * (1.0 + 1e-9));
    if (s != 0.0) x -= (eta * N * s) * P.A_tilde_U.row(i).transpose();

    Vector dx = x - x0;
    const double dist = dx.norm();
    if (dist > cfg.R) x = x0 + dx * (cfg.R / dist);

    avg += (x - avg) / static_cast<double>(t);

    if (stats) {
      ++stats->grad_evals;
      if (cfg.trace_every > 0 && (t % cfg.trace_every == 0 || t == cfg.T))
        stats->trace.emplace_back(stats->grad_evals, P.objective_l1(avg));
    }
  }
  return avg;
}

}  // namespace lad
