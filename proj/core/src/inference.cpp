#include "lrca/inference.hpp"

#include "lrca/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <utility>

namespace lrca {

void CriterionEvaluation::validate() const {
  const Eigen::Index d = point.size();
  if (d < 1 || score.size() != d || hessian.dim() != d || info.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, "criterion evaluation dimensions disagree");
  }
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "sample size must be positive");
  require_finite(point, "point");
  require_finite(score, "score");
  if (!std::isfinite(value)) throw Error(ErrorKind::NonFiniteValue, "criterion value");
}

CriterionEvaluation CriterionEvaluation::with_info_equality() const {
  CriterionEvaluation out = *this;
  out.info = hessian;
  return out;
}

SymMatrix outer_product_info(const Matrix& contributions, bool centered) {
  if (contributions.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "no contributions");
  Matrix c = contributions;
  if (centered) c.rowwise() -= c.colwise().mean();
  Matrix info = c.transpose() * c / static_cast<double>(c.rows());
  return SymMatrix(0.5 * (info + info.transpose()));
}

// ---------------------------------------------------------------------------

Restriction::Restriction(Map psi, JacobianMap jacobian, Vector target)
    : psi_(std::move(psi)), jacobian_(std::move(jacobian)), target_(std::move(target)) {
  if (target_.size() < 1) throw Error(ErrorKind::DimensionMismatch, "restriction needs q >= 1");
  require_finite(target_, "restriction target");
}

Restriction Restriction::fixed_components(Eigen::Index dim, std::vector<Eigen::Index> indices,
                                          Vector values) {
  if (static_cast<Eigen::Index>(indices.size()) != values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "indices and values differ in length");
  }
  for (auto i : indices) {
    if (i < 0 || i >= dim) throw Error(ErrorKind::DimensionMismatch, "restricted index out of range");
  }
  auto psi = [indices](const Vector& theta) {
    Vector out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) out[static_cast<Eigen::Index>(k)] = theta[indices[k]];
    return out;
  };
  auto jac = [indices, dim](const Vector&) {
    Matrix j = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), dim);
    for (std::size_t k = 0; k < indices.size(); ++k) j(static_cast<Eigen::Index>(k), indices[k]) = 1.0;
    return j;
  };
  return Restriction(psi, jac, std::move(values));
}

Restriction Restriction::subvector(Eigen::Index dim, Vector values) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  for (Eigen::Index k = 0; k < values.size(); ++k) idx[static_cast<std::size_t>(k)] = k;
  return fixed_components(dim, std::move(idx), std::move(values));
}

Restriction Restriction::linear(Matrix r_matrix, Vector r_vector) {
  if (r_matrix.rows() != r_vector.size()) {
    throw Error(ErrorKind::DimensionMismatch, "linear restriction rows");
  }
  auto psi = [r_matrix](const Vector& theta) -> Vector { return r_matrix * theta; };
  auto jac = [r_matrix](const Vector&) { return r_matrix; };
  return Restriction(psi, jac, std::move(r_vector));
}

Matrix Restriction::jacobian(const Vector& theta) const {
  Matrix j = jacobian_(theta);
  if (j.rows() != q() || j.cols() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Jacobian must be q x d");
  }
  require_finite(j, "Jacobian");
  Eigen::ColPivHouseholderQR<Matrix> qr(j.transpose());
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < q()) {
    throw Error(ErrorKind::RankDeficientJacobian,
                "Jacobian rank " + std::to_string(qr.rank()) + " < q = " + std::to_string(q()));
  }
  return j;
}

double Restriction::violation(const Vector& theta) const {
  return (psi(theta) - target_).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

TestOutcome make_outcome(double raw_statistic, int df, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "test level must lie in (0, 1)");
  }
  if (std::isnan(raw_statistic)) throw Error(ErrorKind::NonFiniteValue, "statistic is NaN");
  TestOutcome out;
  out.raw_statistic = raw_statistic;
  out.clamped = raw_statistic < 0.0;
  out.statistic = std::max(0.0, raw_statistic);
  out.df = df;
  out.level = level;
  out.p_value = chi2_sf(df, out.statistic);
  out.reject = out.statistic >= chi2_quantile(df, 1.0 - level);
  return out;
}

namespace {

struct Orthogonalized {
  Matrix h_inv;   // H^{-1}
  Matrix jh;      // J H^{-1}  (q x d)
  Cholesky middle;  // J H^{-1} I H^{-1} J'
};

Orthogonalized orthogonalize(const CriterionEvaluation& e, const Restriction& r) {
  e.validate();
  const Matrix j = r.jacobian(e.point);
  Cholesky h_chol(e.hessian);
  Matrix h_inv = h_chol.inverse();
  Matrix jh = j * h_inv;
  Matrix mid = jh * e.info.matrix() * jh.transpose();
  return {std::move(h_inv), std::move(jh), Cholesky(SymMatrix(0.5 * (mid + mid.transpose())))};
}

double half_score_quadratic(const CriterionEvaluation& e) {
  e.validate();
  return 0.5 * e.score.dot(spd_solve(e.hessian, e.score));
}

void check_sample_sizes(const CriterionEvaluation& a, const CriterionEvaluation& b) {
  if (a.n != b.n) {
    throw Error(ErrorKind::SampleSizeMismatch,
                std::to_string(a.n) + " vs " + std::to_string(b.n));
  }
}

void check_restriction(const CriterionEvaluation& res, const Restriction& r) {
  const double tol = 1e-8 * std::max(1.0, r.target().cwiseAbs().maxCoeff());
  if (r.violation(res.point) > tol) {
    throw Error(ErrorKind::RestrictionViolated, "restricted point does not satisfy the null");
  }
}

int to_df(Eigen::Index q) { return static_cast<int>(q); }

}  // namespace

double adjusted_unrestricted(const CriterionEvaluation& e) {
  return e.value + half_score_quadratic(e);
}

SymMatrix projection_matrix(const CriterionEvaluation& e, const Restriction& r) {
  const Orthogonalized o = orthogonalize(e, r);
  Matrix w = o.h_inv - o.jh.transpose() * o.middle.solve(o.jh);
  return SymMatrix(0.5 * (w + w.transpose()));
}

double adjusted_restricted(const CriterionEvaluation& e, const Restriction& r) {
  const SymMatrix w = projection_matrix(e, r);
  return e.value + 0.5 * e.score.dot(w.matrix() * e.score);
}

TestOutcome lrc_alpha(const CriterionEvaluation& unres, const CriterionEvaluation& res,
                      const Restriction& r, double level) {
  check_sample_sizes(unres, res);
  check_restriction(res, r);
  const double corr_u = half_score_quadratic(unres);
  const SymMatrix w = projection_matrix(res, r);
  const double corr_r = 0.5 * res.score.dot(w.matrix() * res.score);
  // Values and corrections are differenced separately to limit cancellation.
  const double stat = 2.0 * static_cast<double>(res.n) *
                      ((unres.value - res.value) + (corr_u - corr_r));
  return make_outcome(stat, to_df(r.q()), level);
}

TestOutcome c_alpha(const CriterionEvaluation& res, const Restriction& r, double level) {
  const Orthogonalized o = orthogonalize(res, r);
  const Vector v = o.jh * res.score;
  const double stat = static_cast<double>(res.n) * v.dot(o.middle.solve(v));
  return make_outcome(stat, to_df(r.q()), level);
}

TestOutcome lrc_alpha_subvector(const CriterionEvaluation& unres,
                                const CriterionEvaluation& res, Eigen::Index d1,
                                double level) {
  check_sample_sizes(unres, res);
  res.validate();
  const Eigen::Index d = res.dim();
  if (d1 < 1 || d1 > d) throw Error(ErrorKind::DimensionMismatch, "subvector size d1");
  const double corr_u = half_score_quadratic(unres);
  double corr_r = 0.0;
  if (d1 < d) {
    const Eigen::Index d2 = d - d1;
    const SymMatrix h22(res.hessian.matrix().bottomRightCorner(d2, d2));
    const Vector s2 = res.score.tail(d2);
    corr_r = 0.5 * s2.dot(spd_solve(h22, s2));
  }
  const double stat = 2.0 * static_cast<double>(res.n) *
                      ((unres.value - res.value) + (corr_u - corr_r));
  return make_outcome(stat, static_cast<int>(d1), level);
}

double subvector_lr_adjustment(const CriterionEvaluation& res, Eigen::Index d1) {
  res.validate();
  if (d1 < 1 || d1 > res.dim()) throw Error(ErrorKind::DimensionMismatch, "subvector size d1");
  const Matrix h_inv = Cholesky(res.hessian).inverse();
  const Matrix sandwich = h_inv * res.info.matrix() * h_inv;
  const Matrix a = h_inv.topLeftCorner(d1, d1);
  const Matrix b = sandwich.topLeftCorner(d1, d1);
  const Vector s1 = res.score.head(d1);
  const Vector as = a * s1;
  const double quad = as.dot(spd_solve(SymMatrix(0.5 * (b + b.transpose())), as)) - s1.dot(as);
  return static_cast<double>(res.n) * quad;
}

TestOutcome classic_lr(const CriterionEvaluation& unres, const CriterionEvaluation& res, int df,
                       double level) {
  check_sample_sizes(unres, res);
  const double stat = 2.0 * static_cast<double>(res.n) * (unres.value - res.value);
  return make_outcome(stat, df, level);
}

TestOutcome classic_lm(const CriterionEvaluation& res, const Restriction& r, double level,
                       LmForm form) {
  if (form == LmForm::FullScore) {
    const double stat = 2.0 * static_cast<double>(res.n) * half_score_quadratic(res);
    return make_outcome(stat, to_df(r.q()), level);
  }
  res.validate();
  const Matrix j = r.jacobian(res.point);
  // Multiplier lambda with J' lambda closest to S in least squares.
  const Matrix jjt = j * j.transpose();
  const Vector lambda = spd_solve(SymMatrix(0.5 * (jjt + jjt.transpose())), Vector(j * res.score));
  const Matrix m = j * spd_solve(res.hessian, Matrix(j.transpose()));
  const double stat = static_cast<double>(res.n) * lambda.dot(m * lambda);
  return make_outcome(stat, to_df(r.q()), level);
}

TestOutcome wald(const Vector& theta_hat, const SymMatrix& covariance, const Restriction& r,
                 double level) {
  if (covariance.dim() != theta_hat.size()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance dimension");
  }
  const Matrix j = r.jacobian(theta_hat);
  const Vector diff = r.psi(theta_hat) - r.target();
  Matrix v = j * covariance.matrix() * j.transpose();
  const double stat = diff.dot(spd_solve(SymMatrix(0.5 * (v + v.transpose())), diff));
  return make_outcome(stat, to_df(r.q()), level);
}

SymMatrix estimate_covariance(const CriterionEvaluation& e, CovarianceKind kind) {
  e.validate();
  const Matrix h_inv = Cholesky(e.hessian).inverse();
  Matrix cov = kind == CovarianceKind::InverseHessian ? h_inv : Matrix(h_inv * e.info.matrix() * h_inv);
  cov /= static_cast<double>(e.n);
  return SymMatrix(0.5 * (cov + cov.transpose()));
}

CriterionEvaluation permute_leading(const CriterionEvaluation& e,
                                    const std::vector<Eigen::Index>& leading) {
  const Eigen::Index d = e.dim();
  std::vector<Eigen::Index> order;
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  for (auto i : leading) {
    if (i < 0 || i >= d || used[static_cast<std::size_t>(i)]) {
      throw Error(ErrorKind::DimensionMismatch, "invalid permutation index");
    }
    used[static_cast<std::size_t>(i)] = true;
    order.push_back(i);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!used[static_cast<std::size_t>(i)]) order.push_back(i);
  }
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(d);
  for (Eigen::Index k = 0; k < d; ++k) perm.indices()[order[static_cast<std::size_t>(k)]] = static_cast<int>(k);
  // perm * v moves entry order[k] to position k.
  const Matrix h = perm * e.hessian.matrix() * perm.transpose();
  const Matrix info = perm * e.info.matrix() * perm.transpose();
  return CriterionEvaluation{perm * e.point, e.value, perm * e.score, SymMatrix(h),
                             SymMatrix(info), e.n};
}

// ---------------------------------------------------------------------------

namespace {

struct EndpointResult {
  double endpoint = 0.0;
  bool truncated = false;
  bool disconnected = false;
  std::vector<IntervalProbe> probes;
};

EndpointResult find_endpoint(const TestBuilder& test, double center, double direction,
                             double bound, const InversionOptions& opt) {
  const double scale = std::max(1.0, std::abs(center));
  const double width = opt.width_tolerance * scale;
  const double max_extent = opt.max_extent * scale;
  double step = opt.initial_step > 0.0 ? opt.initial_step : 1e-2 * scale;
  EndpointResult out;
  out.endpoint = center;
  auto accepts = [&](double v) {
    const bool ok = !test(v).reject;
    out.probes.push_back({v, ok});
    return ok;
  };
  auto beyond = [&](double v) { return direction > 0 ? v >= bound : v <= bound; };

  if (std::isfinite(bound) && beyond(center)) {
    out.endpoint = bound;
    out.truncated = true;
    return out;
  }

  double accepted = center;
  double rejected = center;
  for (;;) {
    double cand = center + direction * step;
    if (std::isfinite(bound) && beyond(cand)) {
      cand = bound;
      if (accepts(cand)) {
        out.endpoint = bound;
        out.truncated = true;
        return out;
      }
      rejected = cand;
      break;
    }
    if (!accepts(cand)) {
      rejected = cand;
      break;
    }
    accepted = cand;
    step *= opt.growth;
    if (step > max_extent) {
      throw Error(ErrorKind::NoBracket, "no rejection within search extent");
    }
  }

  // Probe past the first rejection for further acceptance.
  double probe = rejected;
  for (int k = 0; k < opt.disconnection_probes; ++k) {
    probe += direction * step;
    if (std::isfinite(bound) && beyond(probe)) probe = bound;
    if (accepts(probe)) out.disconnected = true;
    if (probe == bound) break;
  }

  double lo = accepted;
  double hi = rejected;
  while (std::abs(hi - lo) > width) {
    const double mid = 0.5 * (lo + hi);
    if (accepts(mid)) lo = mid; else hi = mid;
  }
  out.endpoint = lo;
  return out;
}

}  // namespace

ConfidenceInterval invert_to_interval(const TestBuilder& test, double center, double level,
                                      std::optional<ParameterRange> range,
                                      const InversionOptions& options) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "confidence level must lie in (0, 1)");
  }
  const ParameterRange pr = range.value_or(ParameterRange{});
  if (center < pr.lower || center > pr.upper) {
    throw Error(ErrorKind::CenterRejected, "center lies outside the parameter range");
  }
  const TestOutcome at_center = test(center);
  if (at_center.reject) {
    throw Error(ErrorKind::CenterRejected,
                "statistic " + std::to_string(at_center.statistic) + " at center exceeds critical value");
  }

  EndpointResult lower;
  EndpointResult upper;
  if (options.parallel_endpoints) {
    auto fut = std::async(std::launch::async, [&] {
      return find_endpoint(test, center, -1.0, pr.lower, options);
    });
    upper = find_endpoint(test, center, 1.0, pr.upper, options);
    lower = fut.get();
  } else {
    lower = find_endpoint(test, center, -1.0, pr.lower, options);
    upper = find_endpoint(test, center, 1.0, pr.upper, options);
  }

  ConfidenceInterval ci;
  ci.lower = lower.endpoint;
  ci.upper = upper.endpoint;
  ci.level = level;
  ci.method = IntervalMethod::Inversion;
  ci.truncated_at_boundary = lower.truncated || upper.truncated;
  ci.disconnected = lower.disconnected || upper.disconnected;
  ci.probes.push_back({center, true});
  ci.probes.insert(ci.probes.end(), lower.probes.begin(), lower.probes.end());
  ci.probes.insert(ci.probes.end(), upper.probes.begin(), upper.probes.end());
  return ci;
}

ConfidenceInterval t_interval(double estimate, double se, double level) {
  if (!(se > 0.0) || !std::isfinite(se)) {
    throw Error(ErrorKind::NonPositiveSE, "standard error " + std::to_string(se));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "confidence level must lie in (0, 1)");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  ConfidenceInterval ci;
  ci.lower = estimate - z * se;
  ci.upper = estimate + z * se;
  ci.level = level;
  ci.method = IntervalMethod::TRatio;
  return ci;
}

}  // namespace lrca
