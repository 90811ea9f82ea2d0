#include <doctest.h>

#include "lrca/error.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/optimize.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>

using namespace lrca;
using lrca::testing::throws_kind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Objective quadratic(const Matrix& q, const Vector& c, bool with_curvature = false) {
  Objective f;
  f.value = [q, c](const Vector& x) { return -0.5 * (x - c).dot(q * (x - c)); };
  f.gradient = [q, c](const Vector& x) { return Vector(-q * (x - c)); };
  if (with_curvature) f.curvature = [q](const Vector&) { return q; };
  return f;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("maximize_box examples") {
  Objective f1;
  f1.value = [](const Vector& t) { return -(t[0] - 1.0) * (t[0] - 1.0); };
  const FitResult a = maximize_box(f1, vec({0.0}), Bounds::unbounded(1));
  CHECK(a.converged);
  CHECK(std::abs(a.point[0] - 1.0) < 1e-8);

  Objective f2;
  f2.value = [](const Vector& t) { return -(t[0] + 1.0) * (t[0] + 1.0); };
  const FitResult b = maximize_box(f2, vec({1.0}), Bounds(vec({0.0}), vec({2.0})));
  CHECK(b.point[0] == 0.0);
  REQUIRE(b.active_set.size() == 1);
  CHECK(b.active_set[0] == 0);

  const Objective f3 = quadratic(Vector(vec({1.0, 3.0})).asDiagonal(), vec({1.0, -1.0}));
  const FitResult c = maximize_box(f3, vec({0.0, 1.0}), Bounds(vec({-kInf, 0.0}), vec({kInf, kInf})));
  CHECK(std::abs(c.point[0] - 1.0) < 1e-8);
  CHECK(c.point[1] == 0.0);
}

TEST_CASE("maximize_box matches active-set enumeration on concave quadratics") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index d = 1 + rep % 4;
    const Matrix q = lrca::testing::random_spd(rng, d, 0.3, 3.0);
    const Vector c = lrca::testing::random_vector(rng, d, 1.5);
    Vector lo(d);
    Vector hi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double a = u(rng);
      const double b = u(rng);
      lo[i] = std::min(a, b) - 0.05;
      hi[i] = std::max(a, b) + 0.05;
      if (rep % 5 == 0 && i == 0) lo[i] = -kInf;
      if (rep % 7 == 0 && i == d - 1) hi[i] = kInf;
    }
    const Bounds bounds(lo, hi);
    const Vector start = bounds.project(Vector::Zero(d));
    const Vector oracle = lrca::testing::box_qp_enumerate(q, c, lo, hi);
    const FitResult fit = maximize_box(quadratic(q, c, true), start, bounds);
    CHECK(fit.converged);
    CHECK((fit.point - oracle).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(bounds.contains(fit.point));
    CHECK(fit.value >= quadratic(q, c).value(start));
    // Gradient-only (BFGS) fits stop once the projected gradient is below
    // 1e-8 max(1, |x|) in max norm, which bounds the Euclidean point error by
    // sqrt(d) times that over lambda_min(Q).
    const FitResult bfgs = maximize_box(quadratic(q, c), start, bounds);
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().minCoeff();
    const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
    CHECK(bfgs.converged);
    CHECK((bfgs.point - oracle).norm() <= 1e-8 * scale * std::sqrt(double(d)) / lambda_min);
    CHECK(bounds.contains(bfgs.point));
  }
}

TEST_CASE("maximize_box reports non-convergence with the best point") {
  Objective rosen;
  rosen.value = [](const Vector& t) {
    return -(100.0 * std::pow(t[1] - t[0] * t[0], 2) + std::pow(1.0 - t[0], 2));
  };
  OptimizeOptions opt;
  opt.max_iterations = 2;
  const Vector start = vec({-1.2, 1.0});
  const FitResult fit = maximize_box(rosen, start, Bounds::unbounded(2), opt);
  CHECK_FALSE(fit.converged);
  CHECK(fit.value >= rosen.value(start));
}

TEST_CASE("maximize_box start errors") {
  const Objective f = quadratic(Matrix::Identity(1, 1), vec({0.0}));
  CHECK(throws_kind(ErrorKind::InfeasibleStart, [&] { maximize_box(f, vec({3.0}), Bounds(vec({0.0}), vec({1.0}))); }));
  Objective nan;
  nan.value = [](const Vector&) { return std::nan(""); };
  CHECK(throws_kind(ErrorKind::NonFiniteEvaluation, [&] { maximize_box(nan, vec({0.0}), Bounds::unbounded(1)); }));
}

TEST_CASE("maximize_fixed examples") {
  const Objective f = quadratic(Matrix::Identity(2, 2), vec({2.0, 3.0}));
  const FitResult all = maximize_fixed(f, vec({0.0, 0.0}), Bounds::unbounded(2), {{0, 0.5}, {1, -1.0}});
  CHECK(all.converged);
  CHECK(all.iterations == 0);
  CHECK(all.point[0] == 0.5);
  CHECK(all.point[1] == -1.0);

  const FitResult one = maximize_fixed(f, vec({0.0, 0.0}), Bounds::unbounded(2), {{0, 0.0}});
  CHECK(one.point[0] == 0.0);
  CHECK(std::abs(one.point[1] - 3.0) < 1e-8);

  CHECK(throws_kind(ErrorKind::InfeasibleStart, [&] {
    maximize_fixed(f, vec({0.0, 0.0}), Bounds(vec({0.0, 0.0}), vec({1.0, 1.0})), {{0, 2.0}});
  }));
}

TEST_CASE("ARCH(2) with alpha2 fixed at zero equals the embedded ARCH(1) fit") {
  models::ArchParams truth{1.0, vec({0.3, 0.0})};
  const auto series = models::arch_simulate(truth, 800, 99);
  const Objective f2 = models::arch_objective(series, 2);
  const Objective f1 = models::arch_objective(series, 1);
  const FitResult fixed = maximize_fixed(f2, vec({1.0, 0.2, 0.0}), models::arch_qmle_bounds(2), {{2, 0.0}});
  const FitResult small = maximize_box(f1, vec({1.0, 0.2}), models::arch_qmle_bounds(1));
  CHECK(fixed.converged);
  CHECK(small.converged);
  CHECK(std::abs(fixed.point[0] - small.point[0]) < 1e-6);
  CHECK(std::abs(fixed.point[1] - small.point[1]) < 1e-6);
  CHECK(fixed.point[2] == 0.0);
}

TEST_CASE("maximize_linear solves an equality-constrained quadratic") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix q = lrca::testing::random_spd(rng, 3);
    const Vector c = lrca::testing::random_vector(rng, 3);
    const Vector coef = lrca::testing::random_vector(rng, 3);
    const double target = 0.7;
    const FitResult fit = maximize_linear(quadratic(q, c), Vector::Zero(3), Bounds::unbounded(3), coef, target);
    // Lagrange solution.
    const Matrix qinv = q.inverse();
    const Vector closed = c - qinv * coef * ((coef.dot(c) - target) / coef.dot(qinv * coef));
    CHECK(fit.converged);
    CHECK(std::abs(coef.dot(fit.point) - target) < 1e-12);
    CHECK((fit.point - closed).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("maximize_linear keeps bounded coordinates feasible") {
  // max -(x-2)^2 - (y-2)^2 s.t. x + y = 1, y >= 0.8.
  const Objective f = quadratic(2.0 * Matrix::Identity(2, 2), vec({2.0, 2.0}));
  const Bounds b(vec({-kInf, 0.8}), vec({kInf, kInf}));
  const FitResult fit = maximize_linear(f, vec({0.0, 1.0}), b, vec({1.0, 1.0}), 1.0);
  CHECK(b.contains(fit.point));
  CHECK(std::abs(fit.point[0] + fit.point[1] - 1.0) < 1e-12);
  CHECK(std::abs(fit.point[0] - 0.2) < 1e-7);
}

TEST_CASE("multistart returns a point at least as good as the single start") {
  Objective bumpy;
  bumpy.value = [](const Vector& t) { return std::cos(3.0 * t[0]) - 0.1 * t[0] * t[0]; };
  OptimizeOptions opt;
  opt.multistart = 8;
  opt.jitter = 2.0;
  opt.seed = 5;
  const Bounds b(vec({-3.0}), vec({3.0}));
  const FitResult single = maximize_box(bumpy, vec({2.0}), b);
  const FitResult multi = maximize_box(bumpy, vec({2.0}), b, opt);
  CHECK(multi.value >= single.value - 1e-12);
  CHECK(b.contains(multi.point));
}
