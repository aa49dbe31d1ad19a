#pragma once

#include "lad/types.hpp"
#include "lad/weights.hpp"

#include <cstdint>
#include <random>

namespace lad {

// With-replacement sample of N rows stored as (unique source row, count,
// scale). Storage never exceeds the unique-row count, even when N >> n.
struct CountedSample {
  std::vector<Index> source_rows;   // strictly increasing source indices
  std::vector<std::int64_t> counts; // per unique row, all positive
  std::vector<double> scales;       // applied to the row values (1/p_i, times any global rescale)
  std::int64_t total_count = 0;     // N = sum(counts)

  std::size_t unique_rows() const { return source_rows.size(); }
};

// Draw N_target i.i.d. row indices from the distribution p / sum(p), by
// walking rows once and drawing k_i ~ Binomial(remaining, p_i / tail_mass).
// Equivalent in distribution to N_target independent categorical draws.
inline CountedSample sample_counts(const WeightVector& p, std::int64_t n_target, std::uint64_t seed) {
  const Index n = p.values.size();
  if (n_target < 1) throw Error(ErrorCode::invalid_argument, "sample_counts: N_target must be >= 1");
  for (Index i = 0; i < n; ++i)
    if (!(p.values[i] > 0.0) || !std::isfinite(p.values[i]))
      throw Error(ErrorCode::invalid_argument, "sample_counts: sampling values must be strictly positive");

  std::mt19937_64 rng(seed);
  CountedSample s;
  s.total_count = n_target;

  double tail = p.values.sum();
  std::int64_t remaining = n_target;
  for (Index i = 0; i < n && remaining > 0; ++i) {
    std::int64_t k;
    if (i == n - 1) {
      k = remaining;  // q = 1 on the last row
    } else {
      double q = p.values[i] / tail;
      q = std::clamp(q, 0.0, 1.0);
      std::binomial_distribution<std::int64_t> bin(remaining, q);
      k = bin(rng);
    }
    tail -= p.values[i];
    if (k > 0) {
      s.source_rows.push_back(i);
      s.counts.push_back(k);
      s.scales.push_back(1.0 / p.values[i]);
      remaining -= k;
    }
  }
  return s;
}

// Uniform variant: equal inclusion probability, one shared scale.
inline CountedSample sample_counts_uniform(Index n, std::int64_t n_target, double scale, std::uint64_t seed) {
  WeightVector p{Vector::Ones(n), WeightKind::sampling};
  CountedSample s = sample_counts(p, n_target, seed);
  for (double& sc : s.scales) sc = scale;
  return s;
}

}  // namespace lad
