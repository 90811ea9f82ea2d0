#pragma once

#include "lrca/numeric.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace lrca {

/// Componentwise box; infinite entries mean no bound on that side.
struct Bounds {
  Vector lower;
  Vector upper;

  Bounds(Vector lo, Vector hi);
  static Bounds unbounded(Eigen::Index dim);

  [[nodiscard]] Eigen::Index dim() const noexcept { return lower.size(); }
  [[nodiscard]] bool contains(const Vector& x) const;
  [[nodiscard]] Vector project(const Vector& x) const;
};

/// Function to maximize. `gradient` defaults to fd_gradient when empty;
/// `curvature`, if set, returns the negative second-derivative matrix and is
/// used in place of the BFGS approximation wherever it is positive definite.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> curvature;
};

struct OptimizeOptions {
  int max_iterations = 500;
  double tolerance = 1e-8;   // projected-gradient test, relative to max(1, |x|_inf)
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  double active_tolerance = 1e-12;
  int multistart = 0;        // extra jittered starts
  double jitter = 0.1;
  std::uint64_t seed = 0;
};

struct FitResult {
  Vector point;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<Eigen::Index> active_set;
  double projected_gradient = 0.0;
};

/// Projected quasi-Newton ascent with Armijo backtracking along the
/// projection arc. Non-convergence is reported through `converged`, with the
/// best point found. Throws InfeasibleStart / NonFiniteEvaluation at the start.
FitResult maximize_box(const Objective& f, const Vector& start, const Bounds& bounds,
                       const OptimizeOptions& options = {});

/// Maximizes over the coordinates not listed in `fixed`; the result embeds the
/// pinned values.
FitResult maximize_fixed(const Objective& f, const Vector& start, const Bounds& bounds,
                         const std::map<Eigen::Index, double>& fixed,
                         const OptimizeOptions& options = {});

/// Maximizes subject to coefficients' theta = target by eliminating one
/// coordinate. Points where the eliminated coordinate leaves its bounds are
/// treated as infeasible during the line search.
FitResult maximize_linear(const Objective& f, const Vector& start, const Bounds& bounds,
                          const Vector& coefficients, double target,
                          const OptimizeOptions& options = {});

}  // namespace lrca
