#include "lrca/models/arch.hpp"

#include "lrca/error.hpp"
#include "lrca/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lrca::models {

Vector ArchParams::to_vector() const {
  Vector theta(alpha.size() + 1);
  theta[0] = omega;
  theta.tail(alpha.size()) = alpha;
  return theta;
}

ArchParams ArchParams::from_vector(const Vector& theta) {
  if (theta.size() < 1) throw Error(ErrorKind::DimensionMismatch, "ARCH parameter vector is empty");
  return ArchParams{theta[0], theta.tail(theta.size() - 1)};
}

void ArchParams::validate() const {
  if (!(omega > 0.0)) throw Error(ErrorKind::NonPositiveVariance, "omega must be positive");
  if (!alpha.allFinite() || (alpha.array() < 0.0).any()) {
    throw Error(ErrorKind::NonPositiveVariance, "ARCH coefficients must be nonnegative");
  }
}

std::vector<double> arch_simulate(const ArchParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "series length must be positive");
  if (params.alpha.sum() >= 1.0) {
    throw Error(ErrorKind::NonStationary, "sum of ARCH coefficients is " + std::to_string(params.alpha.sum()));
  }
  const Eigen::Index p = params.order();
  RngStream rng(seed);
  std::vector<double> x(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double h = params.omega;
    for (Eigen::Index j = 1; j <= p; ++j) {
      if (t >= static_cast<std::size_t>(j)) h += params.alpha[j - 1] * x[t - j] * x[t - j];
    }
    x[t] = std::sqrt(h) * rng.normal();
  }
  return x;
}

namespace {

/// Regressor row z_t = (1, x_{t-1}^2, ..., x_{t-p}^2).
void fill_regressors(std::span<const double> x, std::size_t t, Eigen::Index p, Vector& z) {
  z[0] = 1.0;
  for (Eigen::Index j = 1; j <= p; ++j) {
    z[j] = t >= static_cast<std::size_t>(j) ? x[t - j] * x[t - j] : 0.0;
  }
}

}  // namespace

double arch_quasi_loglik(const Vector& theta, std::span<const double> series) {
  const Eigen::Index p = theta.size() - 1;
  const std::size_t n = series.size();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "empty series");
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double h = theta[0];
    for (Eigen::Index j = 1; j <= p; ++j) {
      if (t >= static_cast<std::size_t>(j)) h += theta[j] * series[t - j] * series[t - j];
    }
    if (!(h > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += std::log(h) + series[t] * series[t] / h;
  }
  return -0.5 * sum / static_cast<double>(n);
}

namespace {

struct ArchDerivatives {
  double value = 0.0;
  Vector score;
  Matrix hessian;        // negative average second derivative
  Matrix expected;       // 1/2 avg z z' / h^2
  Matrix contributions;  // n x d per-observation scores
};

ArchDerivatives arch_derivatives(const Vector& theta, std::span<const double> series,
                                 bool want_contributions) {
  const Eigen::Index d = theta.size();
  const Eigen::Index p = d - 1;
  const std::size_t n = series.size();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "empty series");
  ArchDerivatives out;
  out.score = Vector::Zero(d);
  out.hessian = Matrix::Zero(d, d);
  out.expected = Matrix::Zero(d, d);
  if (want_contributions) out.contributions.resize(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    fill_regressors(series, t, p, z);
    const double h = theta.dot(z);
    if (!(h > 0.0)) {
      throw Error(ErrorKind::NonPositiveVariance, "conditional variance not positive at t = " + std::to_string(t));
    }
    const double x2 = series[t] * series[t];
    const double ratio = x2 / h;
    sum += std::log(h) + ratio;
    const double ds = 0.5 * (ratio - 1.0) / h;
    out.score.noalias() += ds * z;
    const Matrix zz = z * z.transpose() / (h * h);
    out.hessian.noalias() += (0.5 * (2.0 * ratio - 1.0)) * zz;
    out.expected.noalias() += 0.5 * zz;
    if (want_contributions) out.contributions.row(static_cast<Eigen::Index>(t)) = ds * z.transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value = -0.5 * sum * inv_n;
  out.score *= inv_n;
  out.hessian *= inv_n;
  out.expected *= inv_n;
  return out;
}

}  // namespace

CriterionEvaluation arch_criterion(const ArchParams& params, std::span<const double> series,
                                   InfoEstimator info, ArchCurvature curvature) {
  if (!(params.omega > 0.0)) throw Error(ErrorKind::NonPositiveVariance, "omega must be positive");
  const Vector theta = params.to_vector();
  ArchDerivatives der = arch_derivatives(theta, series, info != InfoEstimator::Hessian);
  SymMatrix h(curvature == ArchCurvature::Observed ? der.hessian : der.expected);
  SymMatrix i = info == InfoEstimator::Hessian
                    ? h
                    : outer_product_info(der.contributions, info == InfoEstimator::CenteredOuterProduct);
  return CriterionEvaluation{theta, der.value, der.score, h, i, series.size()};
}

Objective arch_objective(std::span<const double> series, Eigen::Index p) {
  Objective f;
  f.value = [series, p](const Vector& theta) {
    if (theta.size() != p + 1) throw Error(ErrorKind::DimensionMismatch, "ARCH parameter size");
    return arch_quasi_loglik(theta, series);
  };
  f.gradient = [series](const Vector& theta) -> Vector {
    return arch_derivatives(theta, series, false).score;
  };
  f.curvature = [series](const Vector& theta) -> Matrix {
    return arch_derivatives(theta, series, false).hessian;
  };
  return f;
}

Bounds arch_qmle_bounds(Eigen::Index p) {
  Vector lo = Vector::Zero(p + 1);
  Vector hi = Vector::Constant(p + 1, 0.9999);
  lo[0] = 1e-8;
  hi[0] = std::numeric_limits<double>::infinity();
  return Bounds(lo, hi);
}

// ---------------------------------------------------------------------------

Vector nnls(const Matrix& a, const Vector& b) {
  const Eigen::Index k = a.cols();
  Vector x = Vector::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     a.cwiseAbs().colwise().sum().maxCoeff() * static_cast<double>(std::max(a.rows(), k));

  auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j) if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    const Vector zp = ap.colPivHouseholderQr().solve(b);
    z.setZero();
    for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Eigen::Index>(c)];
  };

  Vector w = a.transpose() * (b - a * x);
  for (int outer = 0; outer < 3 * k + 10; ++outer) {
    Eigen::Index jmax = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
        wmax = w[j];
        jmax = j;
      }
    }
    if (jmax < 0) break;
    passive[static_cast<std::size_t>(jmax)] = true;
    Vector z(k);
    for (int inner = 0; inner < 3 * k + 10; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) feasible = false;
      }
      if (feasible) break;
      double step = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          step = std::min(step, x[j] / (x[j] - z[j]));
        }
      }
      x += step * (z - x);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
    x = z;
    w = a.transpose() * (b - a * x);
  }
  return x;
}

ArchParams arch_ols(std::span<const double> series, Eigen::Index p, bool restricted) {
  const std::size_t n = series.size();
  if (p < 0) throw Error(ErrorKind::DimensionMismatch, "negative ARCH order");
  if (n <= static_cast<std::size_t>(p + 1)) {
    throw Error(ErrorKind::SingularDesign, "need more than p + 1 observations");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix design(rows, p + 1);
  Vector y(rows);
  Vector z(p + 1);
  for (std::size_t t = 0; t < n; ++t) {
    fill_regressors(series, t, p, z);
    design.row(static_cast<Eigen::Index>(t)) = z.transpose();
    y[static_cast<Eigen::Index>(t)] = series[t] * series[t];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < p + 1) throw Error(ErrorKind::SingularDesign, "squared-lag design is rank deficient");

  Vector coef;
  if (!restricted) {
    coef = qr.solve(y);
  } else {
    constexpr double kOmegaFloor = 1e-8;
    // omega = floor + nonnegative shift; all coefficients then nonnegative.
    const Vector shifted = y - kOmegaFloor * design.col(0);
    coef = nnls(design, shifted);
    coef[0] += kOmegaFloor;
  }
  return ArchParams{coef[0], coef.tail(p)};
}

}  // namespace lrca::models
