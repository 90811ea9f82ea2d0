#include "lrca/models/error_components.hpp"

#include "lrca/error.hpp"
#include "lrca/rng.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace lrca::models {

Vector EcParams::to_vector() const {
  Vector theta(beta.size() + 3);
  theta.head(beta.size()) = beta;
  theta.tail(3) << sigma2_v, sigma2_eta, sigma2_lambda;
  return theta;
}

EcParams EcParams::from_vector(const Vector& theta) {
  if (theta.size() < 4) throw Error(ErrorKind::DimensionMismatch, "error-components parameter vector");
  const Eigen::Index k = theta.size() - 3;
  return EcParams{theta.head(k), theta[k], theta[k + 1], theta[k + 2]};
}

void PanelData::validate() const {
  if (individuals < 1 || periods < 1) throw Error(ErrorKind::UnbalancedPanel, "empty panel");
  const auto rows = static_cast<Eigen::Index>(individuals * periods);
  if (y.size() != rows || x.rows() != rows) {
    throw Error(ErrorKind::UnbalancedPanel, "row count differs from N * T");
  }
  if (!y.allFinite() || !x.allFinite()) throw Error(ErrorKind::InvalidData, "non-finite panel values");
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

/// Residual projections on the four eigenspaces of the balanced covariance.
struct Spectral {
  std::array<double, 4> lambda;  // eigenvalues
  std::array<double, 4> mult;    // multiplicities
  std::array<double, 4> quad;    // e' P_k e
  Matrix resid;                  // N x T residuals
  Vector row_mean;               // per individual
  Vector col_mean;               // per period
  double grand = 0.0;
};

Spectral decompose(const Vector& theta, const PanelData& panel) {
  const Eigen::Index k = panel.x.cols();
  if (theta.size() != k + 3) throw Error(ErrorKind::DimensionMismatch, "parameter size vs covariates");
  const auto nn = static_cast<Eigen::Index>(panel.individuals);
  const auto tt = static_cast<Eigen::Index>(panel.periods);
  const double N = static_cast<double>(nn);
  const double T = static_cast<double>(tt);
  const double sv = theta[k];
  const double se = theta[k + 1];
  const double sl = theta[k + 2];
  Spectral s;
  s.lambda = {sv, sv + T * se, sv + N * sl, sv + T * se + N * sl};
  s.mult = {(N - 1.0) * (T - 1.0), N - 1.0, T - 1.0, 1.0};
  for (int j = 0; j < 4; ++j) {
    if (s.mult[j] > 0.0 && !(s.lambda[j] > 0.0)) {
      throw Error(ErrorKind::NonPositiveVariance, "covariance eigenvalue not positive");
    }
  }
  const Vector e = panel.y - panel.x * theta.head(k);
  // Row-major N x T view: index i * T + t.
  s.resid = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(e.data(), nn, tt);
  s.row_mean = s.resid.rowwise().mean();
  s.col_mean = s.resid.colwise().mean().transpose();
  s.grand = s.resid.mean();
  const Vector rm = s.row_mean.array() - s.grand;
  const Vector cm = s.col_mean.array() - s.grand;
  const Matrix within = (s.resid.colwise() - s.row_mean).rowwise() - s.col_mean.transpose();
  s.quad[0] = (within.array() + s.grand).square().sum();
  s.quad[1] = T * rm.squaredNorm();
  s.quad[2] = N * cm.squaredNorm();
  s.quad[3] = N * T * s.grand * s.grand;
  return s;
}

/// r = Omega^{-1} e as an N x T matrix.
Matrix omega_inverse_resid(const Spectral& s) {
  const Matrix p1 = ((s.resid.colwise() - s.row_mean).rowwise() - s.col_mean.transpose()).array() + s.grand;
  Matrix r = p1 / s.lambda[0];
  const Vector rm = (s.row_mean.array() - s.grand) / s.lambda[1];
  const Vector cm = (s.col_mean.array() - s.grand) / s.lambda[2];
  r.colwise() += rm;
  r.rowwise() += cm.transpose();
  r.array() += s.grand / s.lambda[3];
  return r;
}

}  // namespace

double ec_loglik(const Vector& theta, const PanelData& panel) {
  const Spectral s = decompose(theta, panel);
  const double cells = static_cast<double>(panel.individuals * panel.periods);
  double acc = cells * kLog2Pi;
  for (int j = 0; j < 4; ++j) {
    if (s.mult[j] > 0.0) acc += s.mult[j] * std::log(s.lambda[j]) + s.quad[j] / s.lambda[j];
  }
  return -0.5 * acc / static_cast<double>(panel.individuals);
}

Matrix ec_score_contributions(const Vector& theta, const PanelData& panel) {
  const Spectral s = decompose(theta, panel);
  const Eigen::Index k = panel.x.cols();
  const auto nn = static_cast<Eigen::Index>(panel.individuals);
  const auto tt = static_cast<Eigen::Index>(panel.periods);
  const double N = static_cast<double>(nn);
  const double T = static_cast<double>(tt);
  const Matrix r = omega_inverse_resid(s);

  // Traces of Omega^{-1} dOmega for each variance component.
  double tr_v = 0.0;
  for (int j = 0; j < 4; ++j) if (s.mult[j] > 0.0) tr_v += s.mult[j] / s.lambda[j];
  const double tr_eta = T * ((N - 1.0) / s.lambda[1] + 1.0 / s.lambda[3]);
  const double tr_lambda = N * ((T - 1.0) / s.lambda[2] + 1.0 / s.lambda[3]);
  const Vector period_sums = r.colwise().sum().transpose();

  Matrix out(nn, k + 3);
  for (Eigen::Index i = 0; i < nn; ++i) {
    Vector sb = Vector::Zero(k);
    for (Eigen::Index t = 0; t < tt; ++t) sb += r(i, t) * panel.x.row(i * tt + t).transpose();
    out.row(i).head(k) = sb.transpose();
    out(i, k) = 0.5 * r.row(i).squaredNorm() - 0.5 * tr_v / N;
    const double rs = r.row(i).sum();
    out(i, k + 1) = 0.5 * rs * rs - 0.5 * tr_eta / N;
    out(i, k + 2) = 0.5 * r.row(i).dot(period_sums.transpose()) - 0.5 * tr_lambda / N;
  }
  return out;
}

Vector ec_score(const Vector& theta, const PanelData& panel) {
  return ec_score_contributions(theta, panel).colwise().sum().transpose() /
         static_cast<double>(panel.individuals);
}

CriterionEvaluation ec_criterion(const EcParams& params, const PanelData& panel,
                                 InfoEstimator info) {
  panel.validate();
  if (!(params.sigma2_v > 0.0)) {
    throw Error(ErrorKind::NonPositiveIdiosyncraticVariance, "sigma2_v must be positive");
  }
  const Vector theta = params.to_vector();
  const double value = ec_loglik(theta, panel);
  const Matrix contrib = ec_score_contributions(theta, panel);
  const Vector score = contrib.colwise().sum().transpose() / static_cast<double>(panel.individuals);
  const Matrix jac = fd_jacobian([&panel](const Vector& th) { return ec_score(th, panel); }, theta, 1e-6);
  SymMatrix h(-0.5 * (jac + jac.transpose()));
  SymMatrix i = info == InfoEstimator::Hessian
                    ? h
                    : outer_product_info(contrib, info == InfoEstimator::CenteredOuterProduct);
  return CriterionEvaluation{theta, value, score, h, i, panel.individuals};
}

Objective ec_objective(const PanelData& panel) {
  Objective f;
  f.value = [&panel](const Vector& theta) {
    try {
      return ec_loglik(theta, panel);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  f.gradient = [&panel](const Vector& theta) -> Vector { return ec_score(theta, panel); };
  return f;
}

Bounds ec_default_bounds(Eigen::Index k) {
  const double inf = std::numeric_limits<double>::infinity();
  Vector lo = Vector::Constant(k + 3, -inf);
  Vector hi = Vector::Constant(k + 3, inf);
  lo[k] = 1e-10;
  lo[k + 1] = 0.0;
  lo[k + 2] = 0.0;
  return Bounds(lo, hi);
}

EcParams ec_start(const PanelData& panel) {
  panel.validate();
  const Eigen::Index k = panel.x.cols();
  Eigen::ColPivHouseholderQR<Matrix> qr(panel.x);
  if (qr.rank() < k) throw Error(ErrorKind::SingularDesign, "panel design is rank deficient");
  const Vector beta = qr.solve(panel.y);
  Vector theta(k + 3);
  theta.head(k) = beta;
  theta.tail(3) << 1.0, 0.0, 0.0;
  const Spectral s = decompose(theta, panel);
  const double N = static_cast<double>(panel.individuals);
  const double T = static_cast<double>(panel.periods);
  const double total = (panel.y - panel.x * beta).squaredNorm() / (N * T);
  double sv = s.mult[0] > 0.0 ? s.quad[0] / s.mult[0] : total;
  sv = std::max(sv, 1e-6 * std::max(total, 1e-12));
  const double se = s.mult[1] > 0.0 ? std::max(0.0, (s.quad[1] / s.mult[1] - sv) / T) : 0.0;
  const double sl = s.mult[2] > 0.0 ? std::max(0.0, (s.quad[2] / s.mult[2] - sv) / N) : 0.0;
  // Small interior offsets keep the first iterations off the bounds.
  return EcParams{beta, sv, std::max(se, 0.01 * sv), std::max(sl, 0.01 * sv)};
}

FitResult ec_fit(const PanelData& panel, std::optional<Bounds> bounds,
                 const OptimizeOptions& options) {
  panel.validate();
  const Eigen::Index k = panel.x.cols();
  const auto rows = static_cast<Eigen::Index>(panel.individuals * panel.periods);
  if (rows <= k + 3) throw Error(ErrorKind::SingularDesign, "need N * T > k + 3");
  const Bounds b = bounds.value_or(ec_default_bounds(k));
  const Vector start = b.project(ec_start(panel).to_vector());
  return maximize_box(ec_objective(panel), start, b, options);
}

PanelData ec_simulate(const EcParams& params, const Matrix& x, std::size_t individuals,
                      std::size_t periods, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.rows()) != individuals * periods || x.cols() != params.beta.size()) {
    throw Error(ErrorKind::UnbalancedPanel, "design does not match N * T and beta");
  }
  if (!(params.sigma2_v > 0.0) || params.sigma2_eta < 0.0 || params.sigma2_lambda < 0.0) {
    throw Error(ErrorKind::NonPositiveIdiosyncraticVariance, "invalid variance components");
  }
  RngStream rng(seed);
  Vector ind(static_cast<Eigen::Index>(individuals));
  Vector per(static_cast<Eigen::Index>(periods));
  for (auto& v : ind) v = std::sqrt(params.sigma2_eta) * rng.normal();
  for (auto& v : per) v = std::sqrt(params.sigma2_lambda) * rng.normal();
  PanelData out{individuals, periods, x * params.beta, x};
  for (std::size_t i = 0; i < individuals; ++i) {
    for (std::size_t t = 0; t < periods; ++t) {
      out.y[static_cast<Eigen::Index>(i * periods + t)] +=
          ind[static_cast<Eigen::Index>(i)] + per[static_cast<Eigen::Index>(t)] +
          std::sqrt(params.sigma2_v) * rng.normal();
    }
  }
  return out;
}

}  // namespace lrca::models
