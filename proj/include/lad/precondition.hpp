#pragma once

#include "lad/linalg.hpp"
#include "lad/sampling.hpp"
#include "lad/types.hpp"
#include "lad/weights.hpp"

#include <cmath>
#include <cstdint>
#include <optional>

namespace lad {

enum class PreconditionMode { lewis, uniform };

struct PreconditionConfig {
  double eps = 0.25;        // embedding error target
  double c_sample = 4.0;    // constant in h(n, eps) = c_sample * eps^-2 * ln(n)
  std::uint64_t seed = 0;
  PreconditionMode mode = PreconditionMode::lewis;
  int max_lewis_iters = 30;
  double lewis_tol = 1e-4;
  // Keep every row (count 1, scale 1) and only rotate. Used by tests and
  // oracle-checkable experiments where sampling noise must be excluded.
  bool take_all_rows = false;
};

struct PreconditionedProblem {
  DenseMatrix A_tilde_U;            // unique sampled rows, rotated (d columns)
  Vector b_tilde;                   // right-hand side per unique row
  std::vector<std::int64_t> counts; // multiplicity per unique row
  DenseMatrix U;                    // rotation applied on the right; identity in uniform mode
  std::int64_t N = 0;               // expanded row count = sum(counts)
  Index n_original = 0;
  Index d = 0;
  double eps_embed = 0.0;
  double irb_row_bound = 0.0;       // max_i ||row_i||^2 * N / d  (empirical C_row)
  PreconditionMode mode = PreconditionMode::lewis;
  std::uint64_t seed = 0;
  int sampling_attempts = 1;
  // Uniform-mode diagnostics: conditioning of the sampled Gram relative to I.
  double sampled_gram_condition = 1.0;

  Index unique_rows() const { return A_tilde_U.rows(); }

  Vector residual(const Vector& x) const { return A_tilde_U * x - b_tilde; }

  // l1 objective over the expanded N rows, computed on counted storage.
  double objective_l1(const Vector& x) const {
    Vector r = residual(x);
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += static_cast<double>(counts[i]) * std::abs(r[i]);
    return s;
  }

  double objective_l2(const Vector& x) const {
    Vector r = residual(x);
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += static_cast<double>(counts[i]) * r[i] * r[i];
    return std::sqrt(s);
  }

  // (A~U)^T v over the expanded rows: sum_j c_j row_j^T v_j.
  Vector transpose_apply_counted(const Vector& v) const {
    Vector y = Vector::Zero(d);
    for (Index i = 0; i < A_tilde_U.rows(); ++i)
      y += static_cast<double>(counts[i]) * v[i] * A_tilde_U.row(i).transpose();
    return y;
  }

  // Gram over the expanded rows.
  DenseMatrix counted_gram() const {
    DenseMatrix g = DenseMatrix::Zero(d, d);
    for (Index i = 0; i < A_tilde_U.rows(); ++i)
      g += static_cast<double>(counts[i]) * A_tilde_U.row(i).transpose() * A_tilde_U.row(i);
    return 0.5 * (g + g.transpose()).eval();
  }
};

// A~^T A~ over unique rows with weight count * scale^2; in exact arithmetic
// identical to the Gram of the expanded N-row matrix.
template <typename Matrix>
DenseMatrix compress_gram(const CountedSample& sample, const Matrix& A) {
  const Index d = A.cols();
  DenseMatrix g = DenseMatrix::Zero(d, d);
  for (std::size_t u = 0; u < sample.unique_rows(); ++u) {
    const Index i = sample.source_rows[u];
    if (i < 0 || i >= A.rows())
      throw Error(ErrorCode::invalid_argument, "compress_gram: sample references a row outside the matrix");
    const double w = static_cast<double>(sample.counts[u]) * sample.scales[u] * sample.scales[u];
    if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
      g += w * A.row(i).transpose() * A.row(i);
    } else {
      for (Index k = A.row_begin(i); k < A.row_end(i); ++k)
        for (Index l = A.row_begin(i); l < A.row_end(i); ++l)
          g(A.col_index(k), A.col_index(l)) += w * A.value(k) * A.value(l);
    }
  }
  return 0.5 * (g + g.transpose()).eval();
}

namespace detail {

template <typename Matrix>
Vector dense_row(const Matrix& A, Index i) {
  if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
    return A.row(i).transpose();
  } else {
    return A.row_dense(i);
  }
}

// Lewis weights of the augmented matrix [A b]. When b lies in the range of A
// the augmented matrix is rank deficient; fall back to the weights of A
// alone (the sample of [A b] is then consistent and the embedding matters
// only for the A part).
template <typename Matrix>
Vector augmented_lewis_weights(const Matrix& A, const Vector& b, const PreconditionConfig& cfg) {
  const Index n = A.rows();
  const Index d = A.cols();
  DenseMatrix aug(n, d + 1);
  for (Index i = 0; i < n; ++i) {
    aug.row(i).head(d) = dense_row(A, i).transpose();
    aug(i, d) = b[i];
  }
  try {
    return lewis_weights(aug, cfg.max_lewis_iters, cfg.lewis_tol).values;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::rank_deficient) throw;
  }
  if constexpr (!std::is_same_v<std::decay_t<Matrix>, SparseRowMatrix>) {
    return lewis_weights(A, cfg.max_lewis_iters, cfg.lewis_tol).values;
  } else {
    return lewis_weights(A.to_dense(), cfg.max_lewis_iters, cfg.lewis_tol).values;
  }
}

inline void finalize_irb_stats(PreconditionedProblem& P) {
  double max_sq = 0.0;
  for (Index i = 0; i < P.A_tilde_U.rows(); ++i)
    max_sq = std::max(max_sq, P.A_tilde_U.row(i).squaredNorm());
  P.irb_row_bound = max_sq * static_cast<double>(P.N) / static_cast<double>(P.d);
}

}  // namespace detail

// Lewis-weight sampling of [A b], counted-row compression, and rotation into
// exact isotropic position. The embedding ||A~ y||_1 ~ ||[A b] y||_1 holds
// with high probability over seeds; isotropy holds by construction.
template <typename Matrix>
PreconditionedProblem precondition_lewis(const Matrix& A, const Vector& b, const PreconditionConfig& cfg) {
  const Index n = A.rows();
  const Index d = A.cols();
  if (n != b.size()) throw Error(ErrorCode::dimension_mismatch, "precondition_lewis: A and b row counts differ");
  if (n < d) throw Error(ErrorCode::invalid_argument, "precondition_lewis: need n >= d");
  if (!(cfg.eps > 0.0) || cfg.eps > 1.0)
    throw Error(ErrorCode::invalid_argument, "precondition_lewis: eps must lie in (0, 1]");

  PreconditionedProblem P;
  P.n_original = n;
  P.d = d;
  P.eps_embed = cfg.take_all_rows ? 0.0 : cfg.eps;
  P.mode = PreconditionMode::lewis;
  P.seed = cfg.seed;

  std::optional<WeightVector> sampling;
  if (!cfg.take_all_rows) {
    Vector w = detail::augmented_lewis_weights(A, b, cfg);
    sampling = sampling_values({w, WeightKind::lewis}, n, cfg.eps, cfg.c_sample);
  }

  const int max_attempts = 3;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    CountedSample s;
    if (cfg.take_all_rows) {
      s.total_count = n;
      for (Index i = 0; i < n; ++i) {
        s.source_rows.push_back(i);
        s.counts.push_back(1);
        s.scales.push_back(1.0);
      }
    } else {
      const auto n_target = std::max<std::int64_t>(1, std::llround(sampling->values.sum()));
      s = sample_counts(*sampling, n_target, cfg.seed + static_cast<std::uint64_t>(attempt - 1));
    }

    DenseMatrix G = compress_gram(s, A);
    DenseMatrix rotation;
    try {
      rotation = inv_factor(G).transpose();  // lower factor of G^{-1}; (A~ R)^T (A~ R) = I
    } catch (const Error& e) {
      if (e.code() == ErrorCode::not_spd && attempt < max_attempts && !cfg.take_all_rows) continue;
      throw Error(ErrorCode::rank_deficient,
                  "precondition_lewis: sampled matrix lost rank after " + std::to_string(attempt) + " attempts");
    }

    const Index m = static_cast<Index>(s.unique_rows());
    P.A_tilde_U.resize(m, d);
    P.b_tilde.resize(m);
    P.counts.assign(s.counts.begin(), s.counts.end());
    for (Index u = 0; u < m; ++u) {
      Vector row = detail::dense_row(A, s.source_rows[u]) * s.scales[u];
      P.A_tilde_U.row(u) = (rotation.transpose() * row).transpose();
      P.b_tilde[u] = b[s.source_rows[u]] * s.scales[u];
    }
    P.U = rotation;
    P.N = s.total_count;
    P.sampling_attempts = attempt;
    detail::finalize_irb_stats(P);
    return P;
  }
  throw Error(ErrorCode::rank_deficient, "precondition_lewis: unreachable");
}

// Uniform row sampling for inputs that are already nearly isotropic with
// nearly equal row norms. No rotation and no Lewis computation, so row
// sparsity survives. Validates the precondition and rejects other inputs.
template <typename Matrix>
PreconditionedProblem precondition_uniform(const Matrix& A, const Vector& b, const PreconditionConfig& cfg) {
  const Index n = A.rows();
  const Index d = A.cols();
  if (n != b.size()) throw Error(ErrorCode::dimension_mismatch, "precondition_uniform: A and b row counts differ");
  if (!(cfg.eps > 0.0) || cfg.eps > 1.0)
    throw Error(ErrorCode::invalid_argument, "precondition_uniform: eps must lie in (0, 1]");

  // Validation on [A b]: Gram condition number and row-norm spread both <= 100.
  DenseMatrix aug(n, d + 1);
  for (Index i = 0; i < n; ++i) {
    aug.row(i).head(d) = detail::dense_row(A, i).transpose();
    aug(i, d) = b[i];
  }
  const DenseMatrix aug_gram = gram(aug);
  const double cond = symmetric_condition_number(aug_gram);
  double min_rn = std::numeric_limits<double>::infinity(), max_rn = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double rn = aug.row(i).squaredNorm();
    min_rn = std::min(min_rn, rn);
    max_rn = std::max(max_rn, rn);
  }
  const double mean_diag = aug_gram.trace() / static_cast<double>(n);
  if (!(cond <= 100.0) || !(max_rn <= 100.0 * min_rn))
    throw Error(ErrorCode::not_near_isotropic,
                "precondition_uniform: input not near-isotropic (Gram condition " + std::to_string(cond) +
                    ", row-norm ratio " + std::to_string(min_rn > 0 ? max_rn / min_rn : std::numeric_limits<double>::infinity()) + ")");
  (void)mean_diag;

  const double log_n = std::log(static_cast<double>(std::max<Index>(n, 3)));
  const auto n_target = static_cast<std::int64_t>(
      std::ceil(cfg.c_sample * static_cast<double>(d) / (cfg.eps * cfg.eps) * log_n));

  PreconditionedProblem P;
  P.n_original = n;
  P.d = d;
  P.eps_embed = cfg.eps;
  P.mode = PreconditionMode::uniform;
  P.seed = cfg.seed;
  P.U = DenseMatrix::Identity(d, d);

  const int max_attempts = 3;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    // Rescale by sqrt(n/N) so the sampled Gram stays close to the input Gram.
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(n_target));
    CountedSample s = sample_counts_uniform(n, n_target, scale, cfg.seed + static_cast<std::uint64_t>(attempt - 1));

    DenseMatrix G = compress_gram(s, A);
    const double g_cond = symmetric_condition_number(G);
    if (!std::isfinite(g_cond)) {
      if (attempt < max_attempts) continue;
      throw Error(ErrorCode::rank_deficient, "precondition_uniform: sampled matrix lost rank");
    }

    const Index m = static_cast<Index>(s.unique_rows());
    P.A_tilde_U.resize(m, d);
    P.b_tilde.resize(m);
    P.counts.assign(s.counts.begin(), s.counts.end());
    for (Index u = 0; u < m; ++u) {
      P.A_tilde_U.row(u) = (detail::dense_row(A, s.source_rows[u]) * s.scales[u]).transpose();
      P.b_tilde[u] = b[s.source_rows[u]] * s.scales[u];
    }
    P.N = s.total_count;
    P.sampling_attempts = attempt;
    P.sampled_gram_condition = g_cond;
    detail::finalize_irb_stats(P);
    return P;
  }
  throw Error(ErrorCode::rank_deficient, "precondition_uniform: unreachable");
}

// Map a solution of the preconditioned problem back to the original
// variables. Uniform mode never rotates, so the map is the identity there.
inline Vector lift_solution(const PreconditionedProblem& P, const Vector& x_pre) {
  if (x_pre.size() != P.d) throw Error(ErrorCode::dimension_mismatch, "lift_solution: wrong length");
  if (P.mode == PreconditionMode::uniform) return x_pre;
  return P.U * x_pre;
}

}  // namespace lad
