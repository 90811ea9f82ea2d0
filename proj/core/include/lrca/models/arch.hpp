#pragma once

#include "lrca/inference.hpp"
#include "lrca/optimize.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lrca::models {

/// Gaussian ARCH(p): sigma_t^2 = omega + sum_j alpha_j x_{t-j}^2, presample zeros.
struct ArchParams {
  double omega = 1.0;
  Vector alpha;

  [[nodiscard]] Eigen::Index order() const noexcept { return alpha.size(); }
  /// Parameter vector (omega, alpha_1, ..., alpha_p).
  [[nodiscard]] Vector to_vector() const;
  static ArchParams from_vector(const Vector& theta);
  /// omega > 0 and alpha >= 0; throws NonPositiveVariance otherwise.
  void validate() const;
};

/// Throws NonStationary unless sum(alpha) < 1.
std::vector<double> arch_simulate(const ArchParams& params, std::size_t n, std::uint64_t seed);

/// Average quasi-log-likelihood -1/2 (log sigma_t^2 + x_t^2 / sigma_t^2) only.
/// Returns -inf when some sigma_t^2 <= 0.
double arch_quasi_loglik(const Vector& theta, std::span<const double> series);

/// Which matrix fills CriterionEvaluation::hessian.
enum class ArchCurvature {
  Observed,  // negative average second derivative
  Expected,  // 1/2 avg z_t z_t' / sigma_t^4, its conditional expectation under the model
};

/// Value, analytic score, Hessian and info at `params`. With
/// InfoEstimator::Hessian the info is whichever curvature was selected.
CriterionEvaluation arch_criterion(const ArchParams& params, std::span<const double> series,
                                   InfoEstimator info = InfoEstimator::OuterProduct,
                                   ArchCurvature curvature = ArchCurvature::Observed);

/// OLS of x_t^2 on (1, x_{t-1}^2, ..., x_{t-p}^2). The restricted variant is
/// nonnegative least squares with omega floored at 1e-8.
ArchParams arch_ols(std::span<const double> series, Eigen::Index p, bool restricted);

/// omega in [1e-8, inf), alpha_j in [0, 0.9999].
Bounds arch_qmle_bounds(Eigen::Index p);

/// Maximization target with analytic gradient and curvature.
Objective arch_objective(std::span<const double> series, Eigen::Index p);

/// Nonnegative least squares min |A x - b| s.t. x >= 0 (Lawson-Hanson).
Vector nnls(const Matrix& a, const Vector& b);

}  // namespace lrca::models
