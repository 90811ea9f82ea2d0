#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace lrca {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Throws NonFiniteValue if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

/// Symmetric dense matrix. Construction symmetrizes via (A + A^T)/2 and
/// rejects inputs whose asymmetry exceeds 1e-8 relative to the largest entry.
class SymMatrix {
 public:
  static constexpr double kAsymmetryTolerance = 1e-8;

  explicit SymMatrix(const Matrix& a);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix diagonal(const Vector& diag);

  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Lower-triangular Cholesky factor with the pivot-ratio definiteness test:
/// every pivot must exceed 1e-12 times the largest diagonal entry.
class Cholesky {
 public:
  static constexpr double kPivotRatio = 1e-12;

  explicit Cholesky(const SymMatrix& a);

  [[nodiscard]] Matrix solve(const Matrix& b) const;
  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] Matrix inverse() const;
  [[nodiscard]] double log_determinant() const;
  [[nodiscard]] const Matrix& lower() const noexcept { return l_; }

 private:
  Matrix l_;
};

Matrix spd_solve(const SymMatrix& a, const Matrix& b);
Vector spd_solve(const SymMatrix& a, const Vector& b);
SymMatrix spd_inverse(const SymMatrix& a);

// --- distribution functions ------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x);

double chi2_cdf(int df, double x);
/// P[chi2_df > x]. Throws NegativeStatistic for x < 0.
double chi2_sf(int df, double x);
/// x with P[chi2_df <= x] = p. Requires 0 <= p < 1.
double chi2_quantile(int df, double p);

double normal_cdf(double z);
/// Standard normal quantile for p in (0, 1).
double normal_quantile(double p);

// --- finite differences ----------------------------------------------------

using ScalarFunction = std::function<double(const Vector&)>;
using VectorFunction = std::function<Vector(const Vector&)>;

/// Default relative step: cube root of machine epsilon.
double default_fd_step();

/// Central-difference gradient. Step for coordinate i is h * max(1, |theta_i|);
/// h <= 0 selects default_fd_step().
Vector fd_gradient(const ScalarFunction& f, const Vector& theta, double h = 0.0);

/// Central-difference matrix of second derivatives of f (not negated).
/// h <= 0 selects epsilon^(1/4).
SymMatrix fd_hessian(const ScalarFunction& f, const Vector& theta, double h = 0.0);

/// Central-difference Jacobian of g (rows: outputs, columns: inputs).
Matrix fd_jacobian(const VectorFunction& g, const Vector& theta, double h = 0.0);

}  // namespace lrca
