#include "lrca/models/weibull.hpp"

#include "lrca/error.hpp"
#include "lrca/rng.hpp"

#include <cmath>
#include <limits>

namespace lrca::models {

Vector WeibullParams::to_vector() const {
  Vector theta(beta.size() + 1);
  theta.head(beta.size()) = beta;
  theta[beta.size()] = eta;
  return theta;
}

WeibullParams WeibullParams::from_vector(const Vector& theta) {
  if (theta.size() < 2) throw Error(ErrorKind::DimensionMismatch, "Weibull parameter vector");
  return WeibullParams{theta.head(theta.size() - 1), theta[theta.size() - 1]};
}

namespace {

void check_inputs(const WeibullParams& params, const Matrix& x, const Vector& times) {
  if (!(params.eta > 0.0)) throw Error(ErrorKind::NonPositiveShape, "eta must be positive");
  if (x.cols() != params.beta.size()) throw Error(ErrorKind::DimensionMismatch, "covariate columns vs beta");
  if (x.rows() != times.size() || times.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "covariate rows vs times");
  }
  if (!(times.array() > 0.0).all()) throw Error(ErrorKind::NonPositiveTime, "event times must be positive");
}

}  // namespace

Vector weibull_simulate(const WeibullParams& params, const Matrix& x, std::uint64_t seed) {
  if (!(params.eta > 0.0)) throw Error(ErrorKind::NonPositiveShape, "eta must be positive");
  if (x.cols() != params.beta.size()) throw Error(ErrorKind::DimensionMismatch, "covariate columns vs beta");
  RngStream rng(seed);
  const Vector xb = x * params.beta;
  Vector t(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double u = std::log(-std::log(rng.uniform()));
    t[i] = std::exp((-xb[i] + u) / params.eta);
  }
  return t;
}

double weibull_hazard(double t, const Vector& x_row, const WeibullParams& params) {
  if (!(params.eta > 0.0)) throw Error(ErrorKind::NonPositiveShape, "eta must be positive");
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveTime, "t must be positive");
  return std::exp(x_row.dot(params.beta)) * params.eta * std::pow(t, params.eta - 1.0);
}

CriterionEvaluation weibull_criterion(const WeibullParams& params, const Matrix& x,
                                      const Vector& times, InfoEstimator info) {
  check_inputs(params, x, times);
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  const Eigen::Index d = k + 1;
  const double eta = params.eta;
  const Vector xb = x * params.beta;
  double value = 0.0;
  Vector score = Vector::Zero(d);
  Matrix hess = Matrix::Zero(d, d);
  Matrix contrib(n, d);
  Vector g(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = std::log(times[i]);
    const double u = eta * y + xb[i];
    const double e = std::exp(u);
    value += std::log(eta) + u - e;
    g.head(k) = (1.0 - e) * x.row(i).transpose();
    g[k] = 1.0 / eta + y * (1.0 - e);
    score += g;
    contrib.row(i) = g.transpose();
    hess.topLeftCorner(k, k).noalias() += e * x.row(i).transpose() * x.row(i);
    hess.block(0, k, k, 1).noalias() += (e * y) * x.row(i).transpose();
    hess(k, k) += 1.0 / (eta * eta) + e * y * y;
  }
  hess.block(k, 0, 1, k) = hess.block(0, k, k, 1).transpose();
  const double inv_n = 1.0 / static_cast<double>(n);
  score *= inv_n;
  SymMatrix h(hess * inv_n);
  SymMatrix i = info == InfoEstimator::Hessian
                    ? h
                    : outer_product_info(contrib, info == InfoEstimator::CenteredOuterProduct);
  return CriterionEvaluation{params.to_vector(), value * inv_n, score, h, i,
                             static_cast<std::size_t>(n)};
}

Objective weibull_objective(const Matrix& x, const Vector& times) {
  Objective f;
  const Vector logt = times.array().log().matrix();
  f.value = [x, logt](const Vector& theta) {
    const Eigen::Index k = x.cols();
    const double eta = theta[k];
    if (!(eta > 0.0)) return -std::numeric_limits<double>::infinity();
    const Vector u = eta * logt + x * theta.head(k);
    return std::log(eta) + (u.array() - u.array().exp()).mean();
  };
  f.gradient = [x, times](const Vector& theta) -> Vector {
    return weibull_criterion(WeibullParams::from_vector(theta), x, times, InfoEstimator::Hessian).score;
  };
  f.curvature = [x, times](const Vector& theta) -> Matrix {
    return weibull_criterion(WeibullParams::from_vector(theta), x, times, InfoEstimator::Hessian)
        .hessian.matrix();
  };
  return f;
}

double weibull_moment_eta(const Vector& beta, const Matrix& x, const Vector& times,
                          MomentConvention convention) {
  if (x.cols() != beta.size() || x.rows() != times.size()) {
    throw Error(ErrorKind::DimensionMismatch, "moment estimator inputs");
  }
  if (!(times.array() > 0.0).all()) throw Error(ErrorKind::NonPositiveTime, "event times must be positive");
  const double sum_logt = times.array().log().sum();
  if (sum_logt == 0.0) throw Error(ErrorKind::DegenerateDenominator, "sum of log times is zero");
  const double n = static_cast<double>(times.size());
  const double sum_xb = (x * beta).sum();
  const double sign = convention == MomentConvention::Consistent ? 1.0 : -1.0;
  return (-sum_xb + sign * n * kDigammaOne) / sum_logt;
}

WeibullParams weibull_start(const Matrix& x, const Vector& times) {
  const Vector y = times.array().log().matrix();
  const Vector b = x.colPivHouseholderQr().solve(y);
  const Vector resid = y - x * b;
  const double sd = std::sqrt(resid.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, y.size() - x.cols())));
  // sd(u) = pi / sqrt(6).
  const double eta = sd > 0.0 ? M_PI / (std::sqrt(6.0) * sd) : 1.0;
  WeibullParams p{-eta * b, eta};
  // Intercept absorbs E[u] = Gamma'(1) when the first column is constant.
  if (x.cols() > 0 && (x.col(0).array() == 1.0).all()) p.beta[0] += kDigammaOne;
  return p;
}

Bounds weibull_bounds(Eigen::Index k, double eta_lower) {
  const double inf = std::numeric_limits<double>::infinity();
  Vector lo = Vector::Constant(k + 1, -inf);
  Vector hi = Vector::Constant(k + 1, inf);
  lo[k] = eta_lower;
  return Bounds(lo, hi);
}

}  // namespace lrca::models
