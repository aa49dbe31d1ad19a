#include "lad/smoothing.hpp"

#include "lad/precondition.hpp"
#include "support/reference.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using lad::DenseMatrix;
using lad::Index;
using lad::PreconditionConfig;
using lad::PreconditionedProblem;
using lad::SmoothedObjective;
using lad::Vector;

namespace {

PreconditionedProblem small_problem(std::uint64_t seed) {
  DenseMatrix A = ref::gaussian(40, 3, seed);
  Vector b = ref::gaussian_vec(40, seed + 1000);
  PreconditionConfig cfg;
  cfg.eps = 0.5;
  cfg.seed = seed;
  return lad::precondition_lewis(A, b, cfg);
}

}  // namespace

TEST_CASE("huber envelope at zero and at the boundary") {
  auto zero = lad::huber_value_grad(0.0, 0.7);
  REQUIRE(zero.first == 0.0);
  REQUIRE(zero.second == 0.0);

  const double beta = 0.7;
  auto at_beta = lad::huber_value_grad(beta, beta);
  REQUIRE(at_beta.first == Catch::Approx(beta / 2.0).margin(1e-15));
  REQUIRE(at_beta.second == Catch::Approx(1.0).margin(1e-15));

  auto at_neg = lad::huber_value_grad(-beta, beta);
  REQUIRE(at_neg.first == Catch::Approx(beta / 2.0).margin(1e-15));
  REQUIRE(at_neg.second == Catch::Approx(-1.0).margin(1e-15));

  REQUIRE_THROWS_MATCHES(lad::huber_value_grad(1.0, 0.0), lad::Error,
                         ref::has_code(lad::ErrorCode::invalid_argument));
}

TEST_CASE("huber derivative matches finite differences away from the boundary") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> t_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> b_dist(0.2, 2.0);
  int checked = 0;
  while (checked < 200) {
    const double t = t_dist(rng);
    const double beta = b_dist(rng);
    if (std::abs(std::abs(t) - beta) < 1e-3) continue;  // kink of the second derivative
    ++checked;
    const double fd = ref::central_diff([&](double u) { return lad::huber_value_grad(u, beta).first; }, t);
    REQUIRE(lad::huber_value_grad(t, beta).second == Catch::Approx(fd).margin(1e-6));
  }
}

TEST_CASE("huber sandwich and derivative clamp") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> t_dist(-10.0, 10.0);
  std::uniform_real_distribution<double> b_dist(0.05, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = t_dist(rng);
    const double beta = b_dist(rng);
    auto [v, g] = lad::huber_value_grad(t, beta);
    REQUIRE(v <= std::abs(t) + 1e-15);
    REQUIRE(std::abs(t) <= v + beta / 2.0 + 1e-15);
    REQUIRE(std::abs(g) <= 1.0);
  }
}

TEST_CASE("smoothed objective reports its smoothness constant") {
  auto P = small_problem(3);
  Vector center = Vector::Zero(P.d);
  SmoothedObjective S(P, 0.3, center, 0.05);

  double max_sq = 0.0;
  for (Index i = 0; i < P.A_tilde_U.rows(); ++i)
    max_sq = std::max(max_sq, P.A_tilde_U.row(i).squaredNorm());
  REQUIRE(S.smoothness() ==
          Catch::Approx(static_cast<double>(P.N) * max_sq / 0.3 + 0.05).epsilon(1e-12));
  REQUIRE(S.components() == P.unique_rows());
  REQUIRE(S.expanded_count() == P.N);
}

TEST_CASE("full gradient matches finite differences") {
  auto P = small_problem(5);
  Vector center = 0.1 * ref::gaussian_vec(P.d, 50);
  SmoothedObjective S(P, 0.4, center, 0.2);

  Vector x = 0.5 * ref::gaussian_vec(P.d, 51);
  Vector fd = ref::gradient_fd([&](const Vector& v) { return S.value(v); }, x);
  REQUIRE((S.full_gradient(x) - fd).cwiseAbs().maxCoeff() <= 1e-4 * (1.0 + fd.norm()));
}

TEST_CASE("component gradients are unbiased for the smooth part") {
  auto P = small_problem(7);
  Vector center = Vector::Zero(P.d);
  SmoothedObjective S(P, 0.25, center, 0.0);
  Vector x = 0.3 * ref::gaussian_vec(P.d, 52);

  Vector mean = Vector::Zero(P.d);
  for (Index i = 0; i < S.components(); ++i)
    mean += static_cast<double>(P.counts[i]) / static_cast<double>(P.N) * S.component_gradient(i, x);
  REQUIRE((mean - S.smooth_gradient(x)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("smoothing gap stays within half beta per expanded row") {
  auto P = small_problem(9);
  Vector center = Vector::Zero(P.d);
  const double beta = 0.15;
  SmoothedObjective S(P, beta, center, 0.3);

  std::mt19937_64 rng(60);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(P.d);
    for (Index j = 0; j < P.d; ++j) x[j] = normal(rng);
    const double smooth_part = S.value(x) - 0.5 * S.sigma * (x - center).squaredNorm();
    const double gap = S.unsmoothed_l1(x) - smooth_part;
    REQUIRE(gap >= -1e-10);
    REQUIRE(gap <= static_cast<double>(P.N) * beta / 2.0 + 1e-10);
  }
}

TEST_CASE("smoothed objective satisfies its convexity certificates") {
  auto P = small_problem(11);
  Vector center = 0.2 * ref::gaussian_vec(P.d, 70);
  const double sigma = 0.5;
  SmoothedObjective S(P, 0.2, center, sigma);
  const double L = S.smoothness();

  std::mt19937_64 rng(71);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(P.d), y(P.d);
    for (Index j = 0; j < P.d; ++j) {
      x[j] = normal(rng);
      y[j] = normal(rng);
    }
    const double fx = S.value(x);
    const double fy = S.value(y);
    const Vector gx = S.full_gradient(x);
    const double linear = fx + gx.dot(y - x);
    const double dist_sq = (y - x).squaredNorm();
    const double slack = 1e-8 * (1.0 + std::abs(fy));
    REQUIRE(fy >= linear + 0.5 * sigma * dist_sq - slack);
    REQUIRE(fy <= linear + 0.5 * L * dist_sq + slack);
  }
}

TEST_CASE("smoothed objective validates its construction") {
  auto P = small_problem(13);
  Vector center = Vector::Zero(P.d);
  REQUIRE_THROWS_MATCHES(SmoothedObjective(P, 0.0, center, 0.1), lad::Error,
                         ref::has_code(lad::ErrorCode::invalid_argument));
  REQUIRE_THROWS_MATCHES(SmoothedObjective(P, 0.1, center, -1.0), lad::Error,
                         ref::has_code(lad::ErrorCode::invalid_argument));
  Vector wrong = Vector::Zero(P.d + 1);
  REQUIRE_THROWS_MATCHES(SmoothedObjective(P, 0.1, wrong, 0.1), lad::Error,
                         ref::has_code(lad::ErrorCode::dimension_mismatch));
}
