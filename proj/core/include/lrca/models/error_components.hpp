#pragma once

#include "lrca/inference.hpp"
#include "lrca/optimize.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace lrca::models {

/// y_it = x_it' beta + eta_i + lambda_t + v_it with variance components.
struct EcParams {
  Vector beta;
  double sigma2_v = 1.0;
  double sigma2_eta = 0.0;
  double sigma2_lambda = 0.0;

  /// Parameter vector (beta..., sigma2_v, sigma2_eta, sigma2_lambda).
  [[nodiscard]] Vector to_vector() const;
  static EcParams from_vector(const Vector& theta);
};

/// Balanced panel, rows ordered individual-major, period-minor.
struct PanelData {
  std::size_t individuals = 0;  // N
  std::size_t periods = 0;      // T
  Vector y;
  Matrix x;

  /// Throws UnbalancedPanel / InvalidData.
  void validate() const;
};

/// Average (over individuals) Gaussian log-likelihood via the four-projector
/// spectral form of sigma2_v I + sigma2_eta (I_N x J_T) + sigma2_lambda (J_N x I_T).
double ec_loglik(const Vector& theta, const PanelData& panel);

/// Analytic score of ec_loglik.
Vector ec_score(const Vector& theta, const PanelData& panel);

/// Per-individual score contributions (N x d); rows sum to N * ec_score.
Matrix ec_score_contributions(const Vector& theta, const PanelData& panel);

/// Value, analytic score, Hessian by central differences of the score, and
/// cluster (per-individual) outer-product info. n is the number of individuals.
CriterionEvaluation ec_criterion(const EcParams& params, const PanelData& panel,
                                 InfoEstimator info = InfoEstimator::OuterProduct);

Objective ec_objective(const PanelData& panel);

/// beta free, sigma2_v >= 1e-10, sigma2_eta >= 0, sigma2_lambda >= 0.
Bounds ec_default_bounds(Eigen::Index k);

/// OLS beta with moment-based variance components, floored into the bounds.
EcParams ec_start(const PanelData& panel);

/// Maximum likelihood over the box.
FitResult ec_fit(const PanelData& panel, std::optional<Bounds> bounds = std::nullopt,
                 const OptimizeOptions& options = {});

/// Draws y for the given design (x rows ordered as in PanelData).
PanelData ec_simulate(const EcParams& params, const Matrix& x, std::size_t individuals,
                      std::size_t periods, std::uint64_t seed);

}  // namespace lrca::models
