#pragma once

#include "lrca/inference.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/models/gaussian_mean.hpp"
#include "lrca/models/weibull.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lrca {

enum class TestKind { LRCa, LRCa2, Ca, Ca2, LR, LM, Wald };

std::string to_string(TestKind kind);
/// Accepts the names produced by to_string; throws ConfigInvalid otherwise.
TestKind parse_test_kind(const std::string& name);

/// Estimator used to start the ARCH QMLE.
enum class ArchStart { RestrictedOlse, UnrestrictedOlse };

struct ExperimentConfig {
  std::string dgp = "DGP1";  // DGP1..DGP6 | weibull-size | weibull-power | quadratic
  std::optional<Vector> parameters;  // replaces the DGP's true parameter vector
  std::size_t n = 500;
  std::size_t replications = 1000;
  std::uint64_t master_seed = 20240611;
  std::vector<double> levels{0.05, 0.10};
  std::vector<TestKind> tests;  // empty: every test the model supports
  unsigned workers = 0;         // 0: hardware concurrency

  // ARCH
  ArchStart arch_start = ArchStart::RestrictedOlse;
  InfoEstimator arch_info = InfoEstimator::Hessian;
  models::ArchCurvature arch_curvature = models::ArchCurvature::Expected;

  // Weibull
  bool shape_restricted = true;  // eta >= 1 imposed on the restricted fit
  double null_beta0 = -5.0;      // tested intercept; the slope null is the true slope
  models::MomentConvention moment = models::MomentConvention::Consistent;
  InfoEstimator weibull_info = InfoEstimator::Hessian;

  // Gaussian-mean calibration model: test theta_1 = 0 with theta_2 >= 0.
  // The data variance is variance_ratio times the working variance.
  double correlation = 0.9;
  double variance_ratio = 2.0;
  models::MeanInfo quadratic_info = models::MeanInfo::Population;

  /// Recompute LRC_alpha with the restricted evaluation in both slots and
  /// compare with C_alpha on every replication.
  bool check_identity = false;

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
  /// True parameters of the DGP (or the override).
  [[nodiscard]] Vector true_parameters() const;
  /// Tests actually run: `tests`, or the model default.
  [[nodiscard]] std::vector<TestKind> active_tests() const;
};

/// Raw statistics per replication (NaN where the replication failed).
struct StatisticDraws {
  std::vector<TestKind> tests;
  std::vector<int> df;            // per test
  Matrix statistics;              // replications x tests
  std::vector<bool> failed;       // per replication
  std::vector<std::string> failure_reasons;  // per replication, empty if fine
  std::size_t identity_violations = 0;

  [[nodiscard]] std::size_t failures() const;
  [[nodiscard]] std::size_t replications() const { return failed.size(); }
};

/// Runs every replication; results are stored by replication index, so the
/// output does not depend on the worker count.
StatisticDraws simulate_statistics(const ExperimentConfig& config);

struct RejectionRow {
  std::string dgp;
  std::size_t n = 0;
  std::string test;
  double level = 0.0;
  double rate = 0.0;
  std::size_t failures = 0;

  bool operator==(const RejectionRow&) const = default;
};

struct RejectionTable {
  std::vector<RejectionRow> rows;
  std::size_t replications = 0;

  /// Rate for (test, level); throws ConfigInvalid if absent.
  [[nodiscard]] double rate(const std::string& test, double level) const;
};

/// Rejection counts over successful replications, summed per cell.
RejectionTable tabulate(const ExperimentConfig& config, const StatisticDraws& draws);

RejectionTable run_level_experiment(const ExperimentConfig& config);

/// Header `dgp,n,test,level,rate,failures`; doubles in shortest round-trip form.
void write_csv(std::ostream& out, const RejectionTable& table);
RejectionTable read_rejection_csv(std::istream& in);
/// Aligned markdown mirror: one row per (dgp, n, test), one column per level.
void write_markdown(std::ostream& out, const RejectionTable& table);

struct PowerCurve {
  std::vector<double> grid;
  std::vector<TestKind> tests;
  std::vector<double> levels;
  /// rates[level][test][grid point]
  std::vector<std::vector<std::vector<double>>> rates;
  std::vector<std::size_t> failures;  // per grid point
  std::size_t n = 0;
  std::size_t replications = 0;
};

/// For each grid value the tested intercept is set to that value while the
/// data keep the configured truth; the same master seed (hence the same data)
/// is used at every grid point.
PowerCurve run_power_experiment(const ExperimentConfig& config, const std::vector<double>& grid);

/// Evenly spaced grid from `from` to `to` inclusive.
std::vector<double> linear_grid(double from, double to, double step);

/// Long format `grid,test,level,rate,failures`.
void write_csv(std::ostream& out, const PowerCurve& curve);
/// Plot data `grid,test,rate` at the first level.
void write_plot_csv(std::ostream& out, const PowerCurve& curve);
void write_markdown(std::ostream& out, const PowerCurve& curve);

struct CalibrationSummary {
  TestKind test = TestKind::LRCa;
  int df = 1;
  std::size_t used = 0;
  std::size_t failures = 0;
  std::vector<double> probabilities{0.90, 0.95, 0.99};
  std::vector<double> empirical_quantiles;
  std::vector<double> reference_quantiles;
  double ks_distance = 0.0;
  double ks_band = 0.0;    // 1.36 / sqrt(used)
  bool within_band = false;
};

/// One-sample Kolmogorov-Smirnov distance of `sample` from chi2_df.
double ks_distance_chi2(std::vector<double> sample, int df);
/// Linear interpolation between order statistics (type 7).
double empirical_quantile(std::vector<double> sample, double p);

/// Null distribution summary for `test`; `df_override` replaces the
/// reference degrees of freedom (negative control).
CalibrationSummary null_calibration(const ExperimentConfig& config, TestKind test,
                                    std::optional<int> df_override = std::nullopt);
CalibrationSummary summarize_calibration(const StatisticDraws& draws, TestKind test,
                                         std::optional<int> df_override = std::nullopt);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace lrca
