#include "lrca/numeric.hpp"

#include "lrca/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lrca {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFiniteValue, std::string(what) + " has non-finite entries");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFiniteValue, std::string(what) + " has non-finite entries");
}

// ---------------------------------------------------------------------------

SymMatrix::SymMatrix(const Matrix& a) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "symmetric matrix must be square with dim >= 1");
  }
  require_finite(a, "symmetric matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTolerance * scale) {
    throw Error(ErrorKind::AsymmetricMatrix,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  m_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

// ---------------------------------------------------------------------------

Cholesky::Cholesky(const SymMatrix& a) : l_(Matrix::Zero(a.dim(), a.dim())) {
  const Matrix& m = a.matrix();
  const Eigen::Index d = m.rows();
  const double max_diag = m.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "largest diagonal entry is not positive");
  }
  const double threshold = kPivotRatio * max_diag;
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l_(j, k) * l_(j, k);
    if (!(pivot > threshold)) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "Cholesky pivot " + std::to_string(j) + " = " + std::to_string(pivot));
    }
    const double ljj = std::sqrt(pivot);
    l_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / ljj;
    }
  }
}

Matrix Cholesky::solve(const Matrix& b) const {
  if (b.rows() != l_.rows()) throw Error(ErrorKind::DimensionMismatch, "right-hand side rows");
  const auto tri = l_.triangularView<Eigen::Lower>();
  Matrix y = tri.solve(b);
  return tri.transpose().solve(y);
}

Vector Cholesky::solve(const Vector& b) const {
  Matrix x = solve(Matrix(b));
  return x.col(0);
}

Matrix Cholesky::inverse() const {
  return solve(Matrix(Matrix::Identity(l_.rows(), l_.rows())));
}

double Cholesky::log_determinant() const { return 2.0 * l_.diagonal().array().log().sum(); }

Matrix spd_solve(const SymMatrix& a, const Matrix& b) { return Cholesky(a).solve(b); }

Vector spd_solve(const SymMatrix& a, const Vector& b) { return Cholesky(a).solve(b); }

SymMatrix spd_inverse(const SymMatrix& a) {
  Matrix inv = Cholesky(a).inverse();
  return SymMatrix(0.5 * (inv + inv.transpose()));
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma: power series below a + 1, Lentz continued
// fraction above.

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int k = 0; k < kMaxTerms; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_df(int df) {
  if (df < 1) throw Error(ErrorKind::InvalidProbability, "degrees of freedom must be positive");
}

}  // namespace

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi2_cdf(int df, double x) {
  check_df(df);
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(int df, double x) {
  check_df(df);
  if (std::isnan(x)) throw Error(ErrorKind::NonFiniteValue, "chi-square statistic is NaN");
  if (x < 0.0) throw Error(ErrorKind::NegativeStatistic, "chi-square statistic " + std::to_string(x));
  return gamma_q(0.5 * df, 0.5 * x);
}

namespace {

double chi2_log_pdf(int df, double x) {
  const double k = 0.5 * df;
  return (k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k);
}

}  // namespace

double chi2_quantile(int df, double p) {
  check_df(df);
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "p = " + std::to_string(p) + " outside [0, 1)");
  }
  if (p == 0.0) return 0.0;

  // Residual P(x) - p; the upper tail is used above the median for accuracy.
  const bool upper = p > 0.5;
  auto residual = [&](double x) {
    return upper ? (1.0 - p) - gamma_q(0.5 * df, 0.5 * x) : gamma_p(0.5 * df, 0.5 * x) - p;
  };

  // Wilson-Hilferty start.
  const double z = normal_quantile(p);
  const double c = 2.0 / (9.0 * df);
  double x = df * std::pow(std::max(1.0 - c + z * std::sqrt(c), 0.1), 3.0);

  double lo = 0.0;
  double hi = std::max(2.0 * x, 1.0);
  while (residual(hi) < 0.0) hi *= 2.0;

  constexpr int kNewtonCap = 100;
  for (int it = 0; it < kNewtonCap; ++it) {
    const double r = residual(x);
    if (r == 0.0) return x;
    if (r < 0.0) lo = std::max(lo, x); else hi = std::min(hi, x);
    const double step = r / std::exp(chi2_log_pdf(df, x));
    double next = x - step;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * std::max(1.0, x)) return next;
    x = next;
  }
  // Bisection fallback.
  for (int it = 0; it < 400 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "normal quantile needs p in (0, 1)");
  }
  // Acklam's rational approximation, then two Newton corrections on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double z;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double inv_sqrt_2pi = 0.3989422804014327;
  for (int i = 0; i < 2; ++i) {
    // Work in the smaller tail to avoid cancellation.
    const double err = p < 0.5 ? normal_cdf(z) - p : (1.0 - p) - normal_cdf(-z);
    z -= err / (inv_sqrt_2pi * std::exp(-0.5 * z * z));
  }
  return z;
}

// ---------------------------------------------------------------------------

double default_fd_step() { return std::cbrt(kEps); }

namespace {

double eval_finite(const ScalarFunction& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEvaluation, "function not finite on stencil");
  return v;
}

}  // namespace

Vector fd_gradient(const ScalarFunction& f, const Vector& theta, double h) {
  if (h <= 0.0) h = default_fd_step();
  Vector g(theta.size());
  Vector x = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(theta[i]));
    x[i] = theta[i] + step;
    const double fp = eval_finite(f, x);
    x[i] = theta[i] - step;
    const double fm = eval_finite(f, x);
    x[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

SymMatrix fd_hessian(const ScalarFunction& f, const Vector& theta, double h) {
  if (h <= 0.0) h = std::pow(kEps, 0.25);
  const Eigen::Index d = theta.size();
  Vector steps(d);
  for (Eigen::Index i = 0; i < d; ++i) steps[i] = h * std::max(1.0, std::abs(theta[i]));
  const double f0 = eval_finite(f, theta);
  Matrix hm(d, d);
  Vector x = theta;
  for (Eigen::Index i = 0; i < d; ++i) {
    x[i] = theta[i] + steps[i];
    const double fp = eval_finite(f, x);
    x[i] = theta[i] - steps[i];
    const double fm = eval_finite(f, x);
    x[i] = theta[i];
    hm(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          x[i] = theta[i] + si * steps[i];
          x[j] = theta[j] + sj * steps[j];
          acc += si * sj * eval_finite(f, x);
        }
      }
      x[i] = theta[i];
      x[j] = theta[j];
      hm(i, j) = hm(j, i) = acc / (4.0 * steps[i] * steps[j]);
    }
  }
  return SymMatrix(hm);
}

Matrix fd_jacobian(const VectorFunction& g, const Vector& theta, double h) {
  if (h <= 0.0) h = default_fd_step();
  const Vector g0 = g(theta);
  Matrix jac(g0.size(), theta.size());
  Vector x = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(theta[j]));
    x[j] = theta[j] + step;
    const Vector gp = g(x);
    x[j] = theta[j] - step;
    const Vector gm = g(x);
    x[j] = theta[j];
    if (!gp.allFinite() || !gm.allFinite()) {
      throw Error(ErrorKind::NonFiniteEvaluation, "vector function not finite on stencil");
    }
    jac.col(j) = (gp - gm) / (2.0 * step);
  }
  return jac;
}

}  // namespace lrca
