#pragma once

#include "lad/smoothing.hpp"
#include "lad/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace lad {

struct KatyushaOptions {
  std::uint64_t seed = 0;
  int epoch_cap = 64;
  double gap_drop = 4.0;          // stop once the measured gap fell by this factor
  bool record_trace = false;
};

struct KatyushaStats {
  int epochs = 0;
  std::int64_t grad_evals = 0;
  double gap_initial = 0.0;
  double gap_final = 0.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  bool hit_epoch_cap = false;
  // Momentum parameterization actually used, echoed for auditability.
  double tau1 = 0.0, tau2 = 0.5, alpha = 0.0, smoothness = 0.0;
  std::vector<std::pair<std::int64_t, double>> trace;  // (grad evals, smoothed objective at snapshot)
};

// Accelerated variance-reduced stochastic gradient descent with negative
// momentum on a sigma-strongly-convex smoothed objective. Runs epochs of
// N inner steps; each epoch re-anchors at a snapshot whose full gradient
// both corrects the stochastic gradients and yields the strong-convexity
// lower bound F(x~) - ||grad F(x~)||^2 / (2 sigma) <= F*. Returns once the
// measured gap (objective minus best lower bound) has dropped by
// `gap_drop`, or the best snapshot when the epoch cap is hit. grad_evals
// counts component-gradient work at cost one per inner step (the cached
// snapshot slope costs nothing fresh) plus the per-epoch full passes.
inline Vector katyusha_quarter(const SmoothedObjective& S, const Vector& x_start,
                               const KatyushaOptions& opt, KatyushaStats* stats = nullptr) {
  if (!(S.sigma > 0.0))
    throw Error(ErrorCode::invalid_argument, "katyusha_quarter: requires sigma > 0");
  if (x_start.size() != S.problem->d)
    throw Error(ErrorCode::dimension_mismatch, "katyusha_quarter: x_start has wrong length");

  const Index m_unique = S.components();
  const double N = static_cast<double>(S.expanded_count());
  const std::int64_t m = S.expanded_count();  // inner steps per epoch
  const double sigma = S.sigma;
  const double L = S.smoothness();

  const double tau2 = 0.5;
  const double tau1 = std::min(std::sqrt(static_cast<double>(m) * sigma / (3.0 * L)), 0.5);
  const double alpha = 1.0 / (3.0 * tau1 * L);
  const double theta = 1.0 + alpha * sigma;

  KatyushaStats local;
  KatyushaStats& st = stats ? *stats : local;
  st.tau1 = tau1;
  st.tau2 = tau2;
  st.alpha = alpha;
  st.smoothness = L;

  std::mt19937_64 rng(opt.seed);
  std::vector<double> count_weights(m_unique);
  for (Index i = 0; i < m_unique; ++i) count_weights[i] = static_cast<double>(S.problem->counts[i]);
  std::discrete_distribution<Index> pick(count_weights.begin(), count_weights.end());

  Vector snapshot = x_start;
  Vector y = x_start, z = x_start;

  Vector mu = S.smooth_gradient(snapshot);
  st.grad_evals += m_unique;
  double f_snap = S.value(snapshot);
  Vector full_grad = mu + sigma * (snapshot - S.center);
  st.lower_bound = f_snap - full_grad.squaredNorm() / (2.0 * sigma);
  st.gap_initial = f_snap - st.lower_bound;
  st.gap_final = st.gap_initial;
  if (opt.record_trace) st.trace.emplace_back(st.grad_evals, f_snap);

  Vector best = snapshot;
  double f_best = f_snap;
  if (st.gap_initial <= 0.0) return best;
  const double gap_target = st.gap_initial / opt.gap_drop;

  // Per-row Huber derivative at the snapshot, refreshed per epoch; the
  // correction term N h_i a~_i then costs no extra row product.
  Vector snap_slope(m_unique);

  for (int epoch = 0; epoch < opt.epoch_cap; ++epoch) {
    for (Index i = 0; i < m_unique; ++i) {
      const double r = S.problem->A_tilde_U.row(i).dot(snapshot) - S.problem->b_tilde[i];
      snap_slope[i] = huber_value_grad(r, S.beta).second;
    }
    st.grad_evals += m_unique;

    // theta-weighted average of the y iterates, kept as a running mean: with
    // weights w_k = theta^k the ratio w_k / (w_1 + ... + w_k) obeys
    // r_k = theta r_{k-1} / (1 + theta r_{k-1}), so no theta^k is ever
    // materialized (theta^m overflows double range for long epochs).
    Vector avg = Vector::Zero(S.problem->d);
    double ratio = 1.0;
    const Vector sigma_center = sigma * S.center;
    const double z_denom = 1.0 / alpha + sigma;
    const double y_denom = 3.0 * L + sigma;
    Vector x_next(S.problem->d), g(S.problem->d);
    for (std::int64_t k = 0; k < m; ++k) {
      x_next = tau1 * z + tau2 * snapshot + (1.0 - tau1 - tau2) * y;
      const Index i = pick(rng);
      const auto row = S.problem->A_tilde_U.row(i);
      const double r = row.dot(x_next) - S.problem->b_tilde[i];
      const double slope = huber_value_grad(r, S.beta).second;
      g = mu + (N * (slope - snap_slope[i])) * row.transpose();
      st.grad_evals += 1;

      z = (z / alpha - g + sigma_center) / z_denom;
      y = (3.0 * L * x_next - g + sigma_center) / y_denom;

      if (k > 0) ratio = theta * ratio / (1.0 + theta * ratio);
      avg += ratio * (y - avg);
    }

    snapshot = avg;
    ++st.epochs;

    mu = S.smooth_gradient(snapshot);
    st.grad_evals += m_unique;
    f_snap = S.value(snapshot);
    full_grad = mu + sigma * (snapshot - S.center);
    st.lower_bound = std::max(st.lower_bound, f_snap - full_grad.squaredNorm() / (2.0 * sigma));
    if (opt.record_trace) st.trace.emplace_back(st.grad_evals, f_snap);

    if (f_snap < f_best) {
      f_best = f_snap;
      best = snapshot;
    }
    st.gap_final = f_best - st.lower_bound;
    if (st.gap_final <= gap_target) return best;
  }

  st.hit_epoch_cap = true;
  return best;
}

inline Vector katyusha_quarter(const SmoothedObjective& S, const Vector& x_start, std::uint64_t seed,
                               KatyushaStats* stats = nullptr) {
  KatyushaOptions opt;
  opt.seed = seed;
  return katyusha_quarter(S, x_start, opt, stats);
}

}  // namespace lad
