#pragma once

#include "lad/initializer.hpp"
#include "lad/katyusha.hpp"
#include "lad/precondition.hpp"
#include "lad/sgd.hpp"
#include "lad/smoothing.hpp"
#include "lad/types.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lad {

enum class Method { sgd, accelerated };

inline const char* method_name(Method m) { return m == Method::sgd ? "sgd" : "accelerated"; }
inline const char* mode_name(PreconditionMode m) { return m == PreconditionMode::lewis ? "lewis" : "uniform"; }

// Geometric smoothing/strong-convexity schedule: starting from the gap bound
// Delta <= G sqrt(Theta), each stage halves the Huber width and the proximal
// strength, ending once the residual gap estimate reaches eps_abs.
struct HomotopySchedule {
  double G = 0.0;       // component Lipschitz bound
  double Delta = 0.0;   // bound on f(x0) - f*
  double Theta = 0.0;   // bound on ||x0 - x*||^2
  double eps_abs = 0.0;
  double beta0 = 0.0;   // = Delta / G^2
  double sigma0 = 0.0;  // = Delta / Theta
  int T_stages = 1;

  double beta(int t) const { return beta0 * std::exp2(static_cast<double>(-t)); }
  double sigma_stage(int t) const { return sigma0 * std::exp2(static_cast<double>(-t)); }
  double L_stage(int t) const { return std::exp2(static_cast<double>(t)) / beta0; }
};

inline HomotopySchedule make_homotopy_schedule(double G, double Delta, double Theta, double eps_abs,
                                               int max_stages = 40) {
  if (!(G > 0.0) || !(Delta > 0.0) || !(Theta > 0.0) || !(eps_abs > 0.0))
    throw Error(ErrorCode::invalid_argument, "make_homotopy_schedule: G, Delta, Theta, eps_abs must be > 0");
  HomotopySchedule s;
  s.G = G;
  s.Delta = Delta;
  s.Theta = Theta;
  s.eps_abs = eps_abs;
  s.beta0 = Delta / (G * G);
  s.sigma0 = Delta / Theta;
  const double stages = std::ceil(std::log2(std::max(Delta / eps_abs, 2.0)));
  s.T_stages = static_cast<int>(std::min<double>(stages, max_stages));
  return s;
}

struct HomotopyStats {
  std::vector<std::int64_t> stage_epochs;
  std::int64_t grad_evals = 0;
  bool any_cap_hit = false;
  std::vector<std::pair<std::int64_t, double>> trace;  // (grad evals, counted l1 objective)
};

// Staged smoothing descent: stage t minimizes the Huber-smoothed objective
// with width beta0 2^-t plus the proximal term (sigma0 2^-t / 2)||x - x0||^2,
// warm-starting each stage from the previous one; the proximal center stays
// at x0 throughout.
inline Vector homotopy_solve(const PreconditionedProblem& P, const Vector& x0, const HomotopySchedule& sched,
                             std::uint64_t seed, HomotopyStats* stats = nullptr, bool record_trace = false) {
  if (x0.size() != P.d) throw Error(ErrorCode::dimension_mismatch, "homotopy_solve: x0 has wrong length");
  Vector x = x0;
  for (int t = 0; t < sched.T_stages; ++t) {
    SmoothedObjective S(P, sched.beta(t), x0, sched.sigma_stage(t));
    KatyushaOptions opt;
    opt.seed = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(t + 1);
    KatyushaStats kst;
    x = katyusha_quarter(S, x, opt, &kst);
    if (stats) {
      stats->stage_epochs.push_back(kst.epochs);
      stats->grad_evals += kst.grad_evals;
      stats->any_cap_hit = stats->any_cap_hit || kst.hit_epoch_cap;
      if (record_trace) stats->trace.emplace_back(stats->grad_evals, P.objective_l1(x));
    }
#ifndef NDEBUG
    {
      // The Huber surrogate must under-estimate the l1 part by at most
      // N beta / 2 at every stage.
      const double smooth_part = S.value(x) - 0.5 * S.sigma * (x - x0).squaredNorm();
      const double l1_part = P.objective_l1(x);
      const double slack = 1e-9 * (1.0 + l1_part);
      assert(l1_part >= smooth_part - slack);
      assert(l1_part - smooth_part <= 0.5 * static_cast<double>(P.N) * sched.beta(t) + slack);
    }
#endif
  }
  return x;
}

struct ScheduleEcho {
  double G = 0.0, Delta = 0.0, Theta = 0.0, beta0 = 0.0, sigma0 = 0.0;
  int stages = 0;
};

struct GuessRecord {
  double guess = 0.0;
  double objective = 0.0;          // counted l1 objective of this guess's candidate
  std::int64_t grad_evals = 0;
  std::vector<std::int64_t> stage_counts;  // epochs per stage, or {T} for plain sgd
  bool cap_hit = false;
};

struct SolveReport {
  Vector x_hat;
  double objective_l1 = 0.0;             // on the original (A, b), recomputed at emission
  double preconditioned_objective = 0.0; // counted l1 at the returned preconditioned iterate
  Index n = 0, d = 0;
  std::int64_t nnz = 0, N = 0;
  PreconditionMode mode = PreconditionMode::lewis;
  Method method = Method::accelerated;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double f2 = 0.0;
  std::vector<double> guesses;
  int best_guess = -1;
  std::vector<GuessRecord> guess_records;
  ScheduleEcho schedule;                 // parameters used for the winning guess
  std::int64_t grad_evals = 0;
  double wall_ms = 0.0;
  bool exact_fit = false;
  double irb_row_bound = 0.0;
  int sampling_attempts = 1;
  std::vector<std::pair<std::int64_t, double>> trace;
};

struct SolveConfig {
  PreconditionMode mode = PreconditionMode::lewis;
  double c_sample = 4.0;
  std::uint64_t seed = 0;
  int max_lewis_iters = 30;
  double lewis_tol = 1e-4;
  double c_radius = 8.0;        // constant in R = c_radius sqrt(d/N) f-guess
  std::int64_t max_sgd_steps = 0;  // 0: derive T from the R L / sqrt(T) bound
  bool record_trace = false;
};

// Full pipeline: precondition, initialize, bracket the optimum from the l2
// residual, then run the chosen descent once per bracket guess and keep the
// candidate with the smallest counted l1 objective. Both the sampler and the
// descent run on the full eps budget: the sketch is drawn at distortion eps
// and each descent run targets an absolute gap of eps times its bracket
// guess, absorbing the constant of the delta = O(eps f*) tolerance into the
// oversampling already present in the row-count formulas.
template <typename Matrix>
SolveReport solve_l1(const Matrix& A, const Vector& b, double eps, Method method, const SolveConfig& cfg = {}) {
  if (!(eps > 0.0) || eps > 0.5)
    throw Error(ErrorCode::invalid_argument, "solve_l1: eps must lie in (0, 1/2]");
  const auto t_begin = std::chrono::steady_clock::now();

  const double eps_embed = eps;
  const double delta_descent = eps;

  PreconditionConfig pc;
  pc.eps = eps_embed;
  pc.c_sample = cfg.c_sample;
  pc.seed = cfg.seed;
  pc.mode = cfg.mode;
  pc.max_lewis_iters = cfg.max_lewis_iters;
  pc.lewis_tol = cfg.lewis_tol;

  const PreconditionedProblem P = cfg.mode == PreconditionMode::lewis
                                      ? precondition_lewis(A, b, pc)
                                      : precondition_uniform(A, b, pc);

  SolveReport rep;
  rep.n = A.rows();
  rep.d = A.cols();
  if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
    rep.nnz = static_cast<std::int64_t>(A.rows()) * A.cols();
  } else {
    rep.nnz = A.nnz();
  }
  rep.N = P.N;
  rep.mode = cfg.mode;
  rep.method = method;
  rep.eps = eps;
  rep.seed = cfg.seed;
  rep.irb_row_bound = P.irb_row_bound;
  rep.sampling_attempts = P.sampling_attempts;

  const double eps_cg = std::sqrt(static_cast<double>(P.d) / static_cast<double>(P.N));
  const Vector x0 = cfg.mode == PreconditionMode::lewis ? init_isotropic(P) : init_cg(P, eps_cg);

  const ObjectiveBracket bracket = objective_bracket(P, x0);
  rep.f2 = bracket.f2;
  rep.guesses = bracket.guesses;

  Vector x_pre = x0;
  double f_best = P.objective_l1(x0);

  if (bracket.exact_fit) {
    rep.exact_fit = true;
  } else {
    const double C_row = std::max(P.irb_row_bound, 1.0);
    const double G = std::sqrt(C_row * static_cast<double>(P.N) * static_cast<double>(P.d));
    const double sqrt_d_over_N = std::sqrt(static_cast<double>(P.d) / static_cast<double>(P.N));

    for (std::size_t gi = 0; gi < bracket.guesses.size(); ++gi) {
      const double guess = bracket.guesses[gi];
      const double R = cfg.c_radius * sqrt_d_over_N * guess;
      const double eps_abs = delta_descent * guess;
      const std::uint64_t guess_seed = cfg.seed ^ (0x9e3779b97f4a7c15ull * (gi + 1));

      GuessRecord rec;
      rec.guess = guess;
      Vector cand;
      ScheduleEcho echo;

      if (method == Method::sgd) {
        const double ratio = R * G / eps_abs;
        std::int64_t T = static_cast<std::int64_t>(std::ceil(ratio * ratio));
        if (cfg.max_sgd_steps > 0) T = std::min(T, cfg.max_sgd_steps);
        SgdConfig sc;
        sc.R = R;
        sc.L_grad = G;
        sc.T = std::max<std::int64_t>(T, 1);
        sc.seed = guess_seed;
        sc.row_bound_sq = C_row * static_cast<double>(P.N) * static_cast<double>(P.d);
        sc.trace_every = cfg.record_trace ? std::max<std::int64_t>(1, sc.T / 32) : 0;
        SgdStats st;
        cand = sgd_solve(P, x0, sc, &st);
        rec.grad_evals = st.grad_evals;
        rec.stage_counts = {sc.T};
        if (cfg.record_trace)
          for (const auto& [evals, fval] : st.trace) rep.trace.emplace_back(rep.grad_evals + evals, fval);
      } else {
        const double Theta = R * R;
        const double Delta = G * R;
        const HomotopySchedule sched = make_homotopy_schedule(G, Delta, Theta, eps_abs);
        HomotopyStats st;
        cand = homotopy_solve(P, x0, sched, guess_seed, &st, cfg.record_trace);
        rec.grad_evals = st.grad_evals;
        rec.stage_counts = st.stage_epochs;
        rec.cap_hit = st.any_cap_hit;
        if (cfg.record_trace)
          for (const auto& [evals, fval] : st.trace) rep.trace.emplace_back(rep.grad_evals + evals, fval);
        echo = {sched.G, sched.Delta, sched.Theta, sched.beta0, sched.sigma0, sched.T_stages};
      }

      rec.objective = P.objective_l1(cand);
      rep.grad_evals += rec.grad_evals;
      rep.guess_records.push_back(rec);

      if (rec.objective < f_best) {
        f_best = rec.objective;
        x_pre = std::move(cand);
        rep.best_guess = static_cast<int>(gi);
        rep.schedule = echo;
      }

      // Certificate: once some candidate's objective is at or below the
      // current guess, the true optimum is bracketed and larger guesses can
      // only loosen the step sizes. Stop early.
      if (f_best <= guess) break;
    }
  }

  rep.preconditioned_objective = f_best;
  rep.x_hat = lift_solution(P, x_pre);
  rep.objective_l1 = (matvec(A, rep.x_hat) - b).cwiseAbs().sum();
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_begin).count();
  return rep;
}

}  // namespace lad
