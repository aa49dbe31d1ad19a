#include "lad/initializer.hpp"

#include "lad/oracle.hpp"
#include "lad/precondition.hpp"
#include "support/reference.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using lad::DenseMatrix;
using lad::Index;
using lad::ObjectiveBracket;
using lad::PreconditionConfig;
using lad::PreconditionedProblem;
using lad::Vector;

namespace {

PreconditionedProblem identity_problem(const Vector& b) {
  PreconditionedProblem P;
  P.d = b.size();
  P.N = b.size();
  P.n_original = b.size();
  P.mode = lad::PreconditionMode::lewis;
  P.A_tilde_U = DenseMatrix::Identity(b.size(), b.size());
  P.b_tilde = b;
  P.counts.assign(static_cast<std::size_t>(b.size()), 1);
  P.U = DenseMatrix::Identity(b.size(), b.size());
  return P;
}

DenseMatrix normalized_rows(Index n, Index d, std::uint64_t seed) {
  DenseMatrix A = ref::gaussian(n, d, seed);
  for (Index i = 0; i < n; ++i) A.row(i) /= A.row(i).norm();
  return A;
}

}  // namespace

TEST_CASE("isotropic warm start on the identity returns the right-hand side") {
  Vector b(3);
  b << 1.5, -2.0, 0.25;
  auto P = identity_problem(b);
  Vector x0 = lad::init_isotropic(P);
  REQUIRE((x0 - b).norm() <= 1e-14);
  REQUIRE(P.objective_l1(x0) <= 1e-14);
}

TEST_CASE("isotropic warm start solves consistent systems exactly") {
  DenseMatrix A = ref::gaussian(80, 3, 5);
  Vector b = ref::gaussian_vec(80, 6);
  PreconditionConfig cfg;
  cfg.eps = 0.5;
  cfg.seed = 11;
  auto P = lad::precondition_lewis(A, b, cfg);

  Vector z = ref::gaussian_vec(3, 7);
  P.b_tilde = P.A_tilde_U * z;  // consistent by construction
  Vector x0 = lad::init_isotropic(P);
  REQUIRE((x0 - z).norm() <= 1e-8);
}

TEST_CASE("isotropic warm start matches the normal-equation solve") {
  DenseMatrix A = ref::gaussian(60, 4, 15);
  Vector b = ref::gaussian_vec(60, 16);
  PreconditionConfig cfg;
  cfg.eps = 0.5;
  cfg.seed = 3;
  auto P = lad::precondition_lewis(A, b, cfg);

  Vector x0 = lad::init_isotropic(P);
  Vector direct = lad::spd_solve(P.counted_gram(), P.transpose_apply_counted(P.b_tilde));
  REQUIRE((x0 - direct).norm() <= 1e-8);
}

TEST_CASE("isotropic warm start requires lewis mode") {
  PreconditionedProblem P = identity_problem(Vector::Zero(2));
  P.mode = lad::PreconditionMode::uniform;
  REQUIRE_THROWS_MATCHES(lad::init_isotropic(P), lad::Error,
                         ref::has_code(lad::ErrorCode::invalid_argument));
}

TEST_CASE("isotropic warm start lands near the sampled optimum") {
  const Index n = 25, d = 2;
  int pass4 = 0;
  const int runs = 10;
  for (int seed = 0; seed < runs; ++seed) {
    DenseMatrix A = ref::gaussian(n, d, 500 + static_cast<std::uint64_t>(seed));
    Vector b = A * ref::gaussian_vec(d, 600 + static_cast<std::uint64_t>(seed)) +
               0.5 * ref::gaussian_vec(n, 700 + static_cast<std::uint64_t>(seed));
    PreconditionConfig cfg;
    cfg.eps = 0.5;
    cfg.seed = static_cast<std::uint64_t>(seed);
    auto P = lad::precondition_lewis(A, b, cfg);

    Vector w(P.unique_rows());
    for (Index u = 0; u < P.unique_rows(); ++u) w[u] = static_cast<double>(P.counts[u]);
    auto opt = lad::exact_l1_small(P.A_tilde_U, P.b_tilde, &w);

    Vector x0 = lad::init_isotropic(P);
    const double dist = (x0 - opt.x_star).norm();
    const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(P.N)) * opt.f_star;
    if (dist <= 4.0 * scale) ++pass4;
    REQUIRE(dist <= 8.0 * scale);  // generous constant holds on every draw
  }
  REQUIRE(pass4 >= 8);
}

TEST_CASE("conjugate gradient on the identity finishes in one step") {
  Vector b(4);
  b << 2, -1, 0.5, 3;
  DenseMatrix I = DenseMatrix::Identity(4, 4);
  Vector x = lad::init_cg(I, b, 1e-8, 1);
  REQUIRE((x - b).norm() <= 1e-12);
}

TEST_CASE("conjugate gradient is exact for orthonormal columns") {
  DenseMatrix G = ref::gaussian(30, 4, 23);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  DenseMatrix Q = DenseMatrix(qr.householderQ()).leftCols(4);
  Vector b = ref::gaussian_vec(30, 24);

  Vector x = lad::init_cg(Q, b, 1e-10, 4);
  REQUIRE((x - Q.transpose() * b).norm() <= 1e-10);
}

TEST_CASE("conjugate gradient tracks the direct solve at the stated accuracy") {
  const Index n = 500, d = 8;
  DenseMatrix A = normalized_rows(n, d, 99);
  Vector b = ref::gaussian_vec(n, 100);

  Vector direct = lad::spd_solve(lad::gram(A), A.transpose() * b);
  Vector cg = lad::init_cg(A, b, 1e-3);
  REQUIRE((cg - direct).norm() <= 1e-3 * (A * direct - b).norm());
}

TEST_CASE("counted conjugate gradient matches the expanded problem") {
  DenseMatrix full = normalized_rows(300, 4, 41);
  DenseMatrix A = full.leftCols(3);
  Vector b = full.col(3);
  PreconditionConfig cfg;
  cfg.eps = 0.5;
  cfg.seed = 8;
  cfg.mode = lad::PreconditionMode::uniform;
  auto P = lad::precondition_uniform(A, b, cfg);

  Vector counted = lad::init_cg(P, 1e-8);
  Vector direct = lad::spd_solve(P.counted_gram(), P.transpose_apply_counted(P.b_tilde));
  REQUIRE((counted - direct).norm() <= 1e-6 * (1.0 + direct.norm()));
}

TEST_CASE("conjugate gradient guards its preconditions") {
  DenseMatrix A = ref::gaussian(50, 3, 61);
  Vector b = ref::gaussian_vec(50, 62);

  REQUIRE_THROWS_MATCHES(lad::init_cg(A, b, 0.0), lad::Error,
                         ref::has_code(lad::ErrorCode::invalid_argument));

  DenseMatrix skew = A;
  skew.col(0) *= 1000.0;  // Gram condition number far above 100
  REQUIRE_THROWS_MATCHES(lad::init_cg(skew, b, 1e-3), lad::Error,
                         ref::has_code(lad::ErrorCode::not_near_isotropic));

  DenseMatrix N = normalized_rows(50, 3, 63);
  REQUIRE_THROWS_MATCHES(lad::init_cg(N, b, 1e-10, 1), lad::Error,
                         ref::has_code(lad::ErrorCode::not_converged));
}

TEST_CASE("objective bracket on the median instance") {
  DenseMatrix A(3, 1);
  A << 1, 1, 1;
  Vector b(3);
  b << 1, 2, 4;
  Vector x_l2 = lad::exact_l2(A, b);
  REQUIRE(x_l2[0] == Catch::Approx(7.0 / 3.0).margin(1e-12));

  ObjectiveBracket br = lad::objective_bracket(A, b, x_l2);
  REQUIRE(br.f2 == Catch::Approx(std::sqrt(42.0) / 3.0).margin(1e-12));
  REQUIRE(br.lower == Catch::Approx(br.f2));
  REQUIRE(br.upper == Catch::Approx(std::sqrt(3.0) * br.f2).margin(1e-12));

  // The true optimum (the median) lies inside the bracket.
  const double f_star = 3.0;
  REQUIRE(br.lower <= f_star);
  REQUIRE(f_star <= br.upper + 1e-12);

  // Geometric ladder with ratio 2 reaching past twice the upper end.
  REQUIRE(br.guesses.front() == Catch::Approx(br.f2));
  for (std::size_t i = 1; i < br.guesses.size(); ++i)
    REQUIRE(br.guesses[i] == Catch::Approx(2.0 * br.guesses[i - 1]));
  REQUIRE(br.guesses.back() >= 2.0 * br.upper);
  REQUIRE_FALSE(br.exact_fit);
}

TEST_CASE("objective bracket flags exact fits") {
  DenseMatrix A = ref::gaussian(20, 3, 71);
  Vector z = ref::gaussian_vec(3, 72);
  Vector b = A * z;
  Vector x_l2 = lad::exact_l2(A, b);
  ObjectiveBracket br = lad::objective_bracket(A, b, x_l2);
  REQUIRE(br.exact_fit);
  REQUIRE(br.f2 <= br.zero_tol);
}

TEST_CASE("objective bracket scales linearly with the right-hand side") {
  DenseMatrix A = ref::gaussian(15, 2, 81);
  Vector b = ref::gaussian_vec(15, 82);
  const double alpha = 3.5;

  ObjectiveBracket one = lad::objective_bracket(A, b, lad::exact_l2(A, b));
  Vector b_scaled = alpha * b;
  ObjectiveBracket two = lad::objective_bracket(A, b_scaled, lad::exact_l2(A, b_scaled));

  REQUIRE(two.f2 == Catch::Approx(alpha * one.f2).epsilon(1e-12));
  REQUIRE(two.upper == Catch::Approx(alpha * one.upper).epsilon(1e-12));
  REQUIRE(two.guesses.size() == one.guesses.size());
  for (std::size_t i = 0; i < one.guesses.size(); ++i)
    REQUIRE(two.guesses[i] == Catch::Approx(alpha * one.guesses[i]).epsilon(1e-12));
}

TEST_CASE("bracket always contains the exact optimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 12, d = 2;
    DenseMatrix A = ref::gaussian(n, d, 900 + seed);
    Vector b = ref::gaussian_vec(n, 910 + seed);
    ObjectiveBracket br = lad::objective_bracket(A, b, lad::exact_l2(A, b));
    auto opt = lad::exact_l1_small(A, b);
    REQUIRE(br.lower <= opt.f_star + 1e-9);
    REQUIRE(opt.f_star <= br.upper + 1e-9);
  }
}
