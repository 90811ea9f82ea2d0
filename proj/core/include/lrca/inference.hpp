#pragma once

#include "lrca/numeric.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace lrca {

/// Criterion function evaluated at one point. All quantities are
/// per-observation averages; `n` carries the sample size separately.
struct CriterionEvaluation {
  Vector point;
  double value;
  Vector score;       // S_n
  SymMatrix hessian;  // H_n, negative average second derivative
  SymMatrix info;     // I_n, variance estimate of sqrt(n) S_n
  std::size_t n;

  /// Throws DimensionMismatch / NonFiniteValue on inconsistent fields.
  void validate() const;
  [[nodiscard]] Eigen::Index dim() const noexcept { return point.size(); }

  /// Copy with info replaced by the hessian (information-equality variants).
  [[nodiscard]] CriterionEvaluation with_info_equality() const;
};

/// How a model fills CriterionEvaluation::info.
enum class InfoEstimator {
  OuterProduct,          // uncentered average of contribution outer products
  CenteredOuterProduct,  // contributions demeaned first
  Hessian,               // info := hessian
};

/// Average outer product of the rows of `contributions` (one row per unit).
SymMatrix outer_product_info(const Matrix& contributions, bool centered = false);

/// Null hypothesis psi(theta) = target with a q x d Jacobian of full row rank.
class Restriction {
 public:
  using Map = std::function<Vector(const Vector&)>;
  using JacobianMap = std::function<Matrix(const Vector&)>;

  static constexpr double kRankTolerance = 1e-10;

  Restriction(Map psi, JacobianMap jacobian, Vector target);

  /// theta[indices[k]] = values[k].
  static Restriction fixed_components(Eigen::Index dim, std::vector<Eigen::Index> indices,
                                      Vector values);
  /// Leading subvector theta[0..d1) = values.
  static Restriction subvector(Eigen::Index dim, Vector values);
  /// R theta = r.
  static Restriction linear(Matrix r_matrix, Vector r_vector);

  [[nodiscard]] Vector psi(const Vector& theta) const { return psi_(theta); }
  /// Evaluates the Jacobian and checks full row rank (pivoted QR).
  [[nodiscard]] Matrix jacobian(const Vector& theta) const;
  [[nodiscard]] const Vector& target() const noexcept { return target_; }
  [[nodiscard]] Eigen::Index q() const noexcept { return target_.size(); }

  /// Max-norm violation |psi(theta) - target|.
  [[nodiscard]] double violation(const Vector& theta) const;

 private:
  Map psi_;
  JacobianMap jacobian_;
  Vector target_;
};

struct EstimatePair {
  Vector unrestricted;
  Vector restricted;
  bool unrestricted_is_extremum = true;
  bool restricted_is_extremum = true;
};

struct TestOutcome {
  double statistic = 0.0;  // nonnegative, after clamping
  int df = 1;
  double p_value = 1.0;
  double level = 0.05;
  bool reject = false;
  bool clamped = false;    // raw statistic was negative and set to 0
  double raw_statistic = 0.0;
};

/// Builds a TestOutcome from a raw statistic: clamps negatives to 0 (flagged),
/// rejects when statistic >= chi2_quantile(df, 1 - level).
TestOutcome make_outcome(double raw_statistic, int df, double level);

// --- statistics ------------------------------------------------------------

/// L_n + 1/2 S' H^{-1} S.
double adjusted_unrestricted(const CriterionEvaluation& e);

/// W = H^{-1} - H^{-1} J' [J H^{-1} I H^{-1} J']^{-1} J H^{-1}.
SymMatrix projection_matrix(const CriterionEvaluation& e, const Restriction& r);

/// L_n + 1/2 S' W S.
double adjusted_restricted(const CriterionEvaluation& e, const Restriction& r);

/// Mixed LR / C(alpha) statistic 2n (L^u(unres) - L^r(res)), df = q.
TestOutcome lrc_alpha(const CriterionEvaluation& unres, const CriterionEvaluation& res,
                      const Restriction& r, double level);

/// Score-type C(alpha) statistic n v' M^{-1} v with v = J H^{-1} S.
TestOutcome c_alpha(const CriterionEvaluation& res, const Restriction& r, double level);

/// Subvector form under information equality: the restricted adjustment is
/// 1/2 S_2' H_22^{-1} S_2 where block 2 is everything after the first d1
/// coordinates. Only needs H_22 (not H) positive definite in the restricted slot.
TestOutcome lrc_alpha_subvector(const CriterionEvaluation& unres,
                                const CriterionEvaluation& res, Eigen::Index d1,
                                double level);

/// Difference between the general statistic and the classical LR for an
/// extremum pair (S(unres) = 0, S_2(res) = 0):
///   n S_1' (A B^{-1} A - A) S_1,
/// A = (H^{-1})_11 and B = (H^{-1} I H^{-1})_11 at the restricted point.
double subvector_lr_adjustment(const CriterionEvaluation& res, Eigen::Index d1);

/// 2n (L_n(unres) - L_n(res)); negatives clamped and flagged.
TestOutcome classic_lr(const CriterionEvaluation& unres, const CriterionEvaluation& res,
                       int df, double level);

/// Score-test variants; both agree when the nuisance score vanishes.
enum class LmForm {
  Multiplier,  // n lambda' J H^{-1} J' lambda, lambda = (J J')^{-1} J S
  FullScore,   // n S' H^{-1} S
};

/// Classical score test at the restricted point, df = q.
TestOutcome classic_lm(const CriterionEvaluation& res, const Restriction& r, double level,
                       LmForm form = LmForm::Multiplier);

/// (psi(theta) - psi0)' [J cov J']^{-1} (psi(theta) - psi0).
TestOutcome wald(const Vector& theta_hat, const SymMatrix& covariance, const Restriction& r,
                 double level);

enum class CovarianceKind { InverseHessian, Sandwich };

/// Covariance of the estimate: H^{-1}/n or H^{-1} I H^{-1}/n.
SymMatrix estimate_covariance(const CriterionEvaluation& e,
                              CovarianceKind kind = CovarianceKind::InverseHessian);

/// Moves the coordinates listed in `leading` to the front (in that order),
/// keeping the rest in their original order.
CriterionEvaluation permute_leading(const CriterionEvaluation& e,
                                    const std::vector<Eigen::Index>& leading);

// --- confidence intervals --------------------------------------------------

enum class IntervalMethod { Inversion, TRatio };

struct IntervalProbe {
  double value;
  bool accepted;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::TRatio;
  bool truncated_at_boundary = false;
  bool disconnected = false;  // acceptance found beyond a rejected point
  std::vector<IntervalProbe> probes;
};

struct ParameterRange {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct InversionOptions {
  double initial_step = 0.0;  // <= 0: 1e-2 * max(1, |center|)
  double growth = 2.0;
  double width_tolerance = 1e-6;  // relative to max(1, |center|)
  double max_extent = 1e6;        // relative to max(1, |center|)
  int disconnection_probes = 2;
  bool parallel_endpoints = false;
};

using TestBuilder = std::function<TestOutcome(double)>;

/// Connected acceptance region of `test` around `center`, intersected with
/// `range`. Throws CenterRejected when the center itself is rejected.
ConfidenceInterval invert_to_interval(const TestBuilder& test, double center, double level,
                                      std::optional<ParameterRange> range = std::nullopt,
                                      const InversionOptions& options = {});

/// estimate +/- z_{(1+level)/2} se, never truncated.
ConfidenceInterval t_interval(double estimate, double se, double level);

}  // namespace lrca
