#include <doctest.h>

#include "lrca/error.hpp"
#include "lrca/numeric.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace lrca;
using lrca::testing::throws_kind;

TEST_CASE("spd_solve basic systems") {
  Vector b(2);
  b << 3, 4;
  const Vector x = spd_solve(SymMatrix::identity(2), b);
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == doctest::Approx(4.0));

  Vector d(2);
  d << 2, 4;
  const Vector y = spd_solve(SymMatrix::diagonal(d), d);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));

  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK(throws_kind(ErrorKind::NotPositiveDefinite, [&] { spd_solve(SymMatrix(indefinite), b); }));
  CHECK(throws_kind(ErrorKind::DimensionMismatch, [&] { spd_solve(SymMatrix::identity(3), b); }));
}

TEST_CASE("spd_solve recovers x for random SPD matrices up to condition 1e8") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_cond(0.0, 8.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index d = 1 + rep % 10;
    const double cond = std::pow(10.0, log_cond(rng));
    const Matrix a = lrca::testing::random_spd(rng, d, 1.0 / cond, 1.0);
    const Vector x = lrca::testing::random_vector(rng, d);
    const Vector got = spd_solve(SymMatrix(a), Vector(a * x));
    worst = std::max(worst, (got - x).norm() / x.norm());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("SymMatrix symmetrizes and rejects asymmetry") {
  Matrix a(2, 2);
  a << 1.0, 2.0, 2.0 + 1e-12, 1.0;
  const SymMatrix s(a);
  CHECK(s(0, 1) == s(1, 0));
  a(1, 0) = 2.5;
  CHECK(throws_kind(ErrorKind::AsymmetricMatrix, [&] { SymMatrix{a}; }));
}

TEST_CASE("chi2 quantile examples against independent oracles") {
  CHECK(std::abs(chi2_quantile(1, 0.95) - 3.841458821) < 1e-9);
  CHECK(std::abs(chi2_quantile(1, 0.95) - lrca::testing::chi2_quantile_bisect(1, 0.95)) < 1e-9);
  CHECK(std::abs(chi2_quantile(2, 0.95) - (-2.0 * std::log(0.05))) < 1e-9);
  CHECK(std::abs(chi2_quantile(2, 0.95) - 5.991464547) < 1e-9);
  CHECK(chi2_quantile(7, 0.0) == 0.0);
  CHECK(throws_kind(ErrorKind::InvalidProbability, [] { chi2_quantile(1, 1.0); }));
  CHECK(throws_kind(ErrorKind::InvalidProbability, [] { chi2_quantile(1, -0.1); }));
}

TEST_CASE("chi2 sf examples") {
  CHECK(chi2_sf(1, 0.0) == 1.0);
  CHECK(std::abs(chi2_sf(2, 5.991464547) - 0.05) < 1e-9);
  const double z = std::sqrt(3.841458821);
  CHECK(std::abs(chi2_sf(1, 3.841458821) - 2.0 * (1.0 - lrca::testing::normal_cdf_erf(z))) < 1e-9);
  CHECK(throws_kind(ErrorKind::NegativeStatistic, [] { chi2_sf(1, -1.0); }));
}

TEST_CASE("chi2 quantile agrees with boost bisection across df") {
  for (int df = 1; df <= 10; ++df) {
    for (int k = 1; k <= 99; ++k) {
      const double p = k / 100.0;
      CHECK(std::abs(chi2_quantile(df, p) - lrca::testing::chi2_quantile_bisect(df, p)) < 1e-8);
    }
  }
}

TEST_CASE("chi2 quantile is monotone in p") {
  for (int df : {1, 3, 8}) {
    double prev = -1.0;
    for (int k = 0; k < 1000; ++k) {
      const double q = chi2_quantile(df, k / 1000.0);
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("normal quantile") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959963985) < 1e-9);
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.8, 0.999}) {
    CHECK(std::abs(normal_quantile(p) - lrca::testing::normal_quantile_bisect(p)) < 1e-9);
  }
}

TEST_CASE("finite differences") {
  const ScalarFunction quad = [](const Vector& t) { return 0.5 * (2 * t[0] * t[0] + 4 * t[1] * t[1]); };
  const Vector one = Vector::Ones(2);
  const Vector g = fd_gradient(quad, one);
  CHECK(std::abs(g[0] - 2.0) < 1e-9);
  CHECK(std::abs(g[1] - 4.0) < 1e-9);

  const ScalarFunction cube = [](const Vector& t) { return t[0] * t[0] * t[0]; };
  CHECK(std::abs(fd_gradient(cube, Vector::Constant(1, 2.0), 1e-4)[0] - 12.0) < 1e-6);

  const SymMatrix h = fd_hessian(quad, one);
  CHECK(std::abs(h(0, 0) - 2.0) < 1e-5);
  CHECK(std::abs(h(1, 1) - 4.0) < 1e-5);
  CHECK(std::abs(h(0, 1)) < 1e-5);

  const ScalarFunction bad = [](const Vector& t) { return t[0] > 1.0 ? std::nan("") : t[0]; };
  CHECK(throws_kind(ErrorKind::NonFiniteEvaluation, [&] { fd_gradient(bad, Vector::Constant(1, 1.0)); }));
}
