#pragma once

#include "lrca/inference.hpp"
#include "lrca/optimize.hpp"

#include <cstdint>

namespace lrca::models {

/// z_i ~ N(theta, V) fitted by the working criterion
///   L(theta) = -1/2 avg (z_i - theta)' A (z_i - theta),  A = working^{-1}.
/// The criterion is exactly quadratic with H = A; the score variance is
/// A V A, which equals H only when working == V.
struct GaussianMean {
  Matrix covariance;  // V, the data covariance
  Matrix working;     // covariance assumed by the criterion
  Matrix draws;       // n x d

  [[nodiscard]] Eigen::Index dim() const noexcept { return covariance.rows(); }
};

/// How gaussian_mean_criterion fills `info`.
enum class MeanInfo {
  Population,            // A V A from the known V
  OuterProduct,          // uncentered average of contribution outer products
  CenteredOuterProduct,
  Working,               // A, as if the working covariance were correct
};

/// Bivariate covariance with variances `variance` and correlation rho.
Matrix unit_correlation(double rho, double variance = 1.0);

GaussianMean gaussian_mean_simulate(const Vector& theta, const Matrix& covariance,
                                    const Matrix& working, std::size_t n, std::uint64_t seed);

CriterionEvaluation gaussian_mean_criterion(const Vector& theta, const GaussianMean& data,
                                            MeanInfo info = MeanInfo::Population);

Objective gaussian_mean_objective(const GaussianMean& data);

}  // namespace lrca::models
