#include "lrca/models/gaussian_mean.hpp"

#include "lrca/error.hpp"
#include "lrca/rng.hpp"

#include <cmath>

namespace lrca::models {

Matrix unit_correlation(double rho, double variance) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorKind::NotPositiveDefinite, "|rho| must be below 1");
  if (!(variance > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "variance must be positive");
  Matrix v(2, 2);
  v << 1.0, rho, rho, 1.0;
  return variance * v;
}

GaussianMean gaussian_mean_simulate(const Vector& theta, const Matrix& covariance,
                                    const Matrix& working, std::size_t n, std::uint64_t seed) {
  if (covariance.rows() != theta.size() || covariance.cols() != theta.size() ||
      working.rows() != theta.size() || working.cols() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance does not match theta");
  }
  const Matrix l = Cholesky(SymMatrix(covariance)).lower();
  RngStream rng(seed);
  GaussianMean out{covariance, working, Matrix(static_cast<Eigen::Index>(n), theta.size())};
  Vector e(theta.size());
  for (Eigen::Index i = 0; i < out.draws.rows(); ++i) {
    for (auto& v : e) v = rng.normal();
    out.draws.row(i) = (theta + l * e).transpose();
  }
  return out;
}

CriterionEvaluation gaussian_mean_criterion(const Vector& theta, const GaussianMean& data,
                                            MeanInfo info) {
  if (theta.size() != data.dim()) throw Error(ErrorKind::DimensionMismatch, "theta vs model");
  const SymMatrix a = spd_inverse(SymMatrix(data.working));
  const Matrix centered = data.draws.rowwise() - theta.transpose();
  const Matrix contrib = centered * a.matrix();
  const double value = -0.5 * contrib.cwiseProduct(centered).sum() / static_cast<double>(centered.rows());
  const Vector score = contrib.colwise().mean().transpose();
  Matrix i;
  switch (info) {
    case MeanInfo::Population: i = a.matrix() * data.covariance * a.matrix(); break;
    case MeanInfo::Working: i = a.matrix(); break;
    case MeanInfo::OuterProduct: i = outer_product_info(contrib, false).matrix(); break;
    case MeanInfo::CenteredOuterProduct: i = outer_product_info(contrib, true).matrix(); break;
  }
  return CriterionEvaluation{theta, value, score, a, SymMatrix(0.5 * (i + i.transpose())),
                             static_cast<std::size_t>(centered.rows())};
}

Objective gaussian_mean_objective(const GaussianMean& data) {
  const Matrix a = spd_inverse(SymMatrix(data.working)).matrix();
  const Vector mean = data.draws.colwise().mean().transpose();
  // The criterion equals offset - 1/2 (theta - mean)' A (theta - mean).
  const Matrix c = data.draws.rowwise() - mean.transpose();
  const double offset = -0.5 * (c * a).cwiseProduct(c).sum() / static_cast<double>(c.rows());
  Objective f;
  f.value = [a, mean, offset](const Vector& th) {
    const Vector d = th - mean;
    return offset - 0.5 * d.dot(a * d);
  };
  f.gradient = [a, mean](const Vector& th) -> Vector { return a * (mean - th); };
  f.curvature = [a](const Vector&) -> Matrix { return a; };
  return f;
}

}  // namespace lrca::models
