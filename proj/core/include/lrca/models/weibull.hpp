#pragma once

#include "lrca/inference.hpp"
#include "lrca/optimize.hpp"

#include <cstdint>

namespace lrca::models {

/// Weibull regression log t = (-x'beta + u) / eta, exp(u) ~ Exp(1).
struct WeibullParams {
  Vector beta;  // includes the intercept
  double eta = 1.0;

  /// Parameter vector (beta_0, ..., beta_{k-1}, eta).
  [[nodiscard]] Vector to_vector() const;
  static WeibullParams from_vector(const Vector& theta);
};

/// Gamma'(1), the mean of the log of a unit exponential.
inline constexpr double kDigammaOne = -0.5772156649015329;

/// Event times for covariate rows `x` (n x k).
Vector weibull_simulate(const WeibullParams& params, const Matrix& x, std::uint64_t seed);

/// lambda(t) = exp(x'beta) eta t^(eta - 1).
double weibull_hazard(double t, const Vector& x_row, const WeibullParams& params);

/// Average log-likelihood log eta + (eta y + x'beta) - exp(eta y + x'beta), y = log t.
CriterionEvaluation weibull_criterion(const WeibullParams& params, const Matrix& x,
                                      const Vector& times,
                                      InfoEstimator info = InfoEstimator::OuterProduct);

Objective weibull_objective(const Matrix& x, const Vector& times);

/// Sign of the digamma term in the moment estimator of eta.
enum class MomentConvention {
  Consistent,  // (-sum x'beta + n Gamma'(1)) / sum log t, reproduces eta at the truth
  FlippedSign,   // (-sum x'beta - n Gamma'(1)) / sum log t
};

double weibull_moment_eta(const Vector& beta, const Matrix& x, const Vector& times,
                          MomentConvention convention = MomentConvention::Consistent);

/// Starting values from OLS of log t on x.
WeibullParams weibull_start(const Matrix& x, const Vector& times);

/// eta bounded below by `eta_lower` (1 for the monotone-hazard restriction).
Bounds weibull_bounds(Eigen::Index k, double eta_lower);

/// Smallest admissible shape when no monotone-hazard restriction is imposed.
inline constexpr double kMinShape = 1e-6;

}  // namespace lrca::models
