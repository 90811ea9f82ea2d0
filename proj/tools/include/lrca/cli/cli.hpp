#pragma once

#include "lrca/inference.hpp"
#include "lrca/montecarlo.hpp"
#include "lrca/optimize.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lrca::cli {

/// Raised for malformed commands, flags or configs (exit status 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- restriction grammar ----------------------------------------------------

/// Either comma-separated `name=value` pairs or one `c1*p1+c2*p2=v`.
struct RestrictionSpec {
  std::map<Eigen::Index, double> fixed;  // by parameter index
  std::optional<Vector> coefficients;   // linear form when set
  double target = 0.0;

  [[nodiscard]] bool is_linear() const noexcept { return coefficients.has_value(); }
  [[nodiscard]] Restriction to_restriction(Eigen::Index dim) const;
};

RestrictionSpec parse_restriction(const std::string& text, const std::vector<std::string>& names);

// --- models backed by user data ---------------------------------------------

struct ModelOptions {
  Eigen::Index arch_order = 1;
  bool monotone_hazard = false;  // eta >= 1 on the Weibull parameter space
  std::optional<InfoEstimator> info;  // model default when empty
};

/// A criterion bound to a data file with everything needed to fit and test.
struct DataModel {
  std::string id;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> aliases;  // extra accepted names per parameter
  Bounds bounds = Bounds::unbounded(0);
  Objective objective;
  Vector start;
  InfoEstimator info = InfoEstimator::OuterProduct;
  std::function<CriterionEvaluation(const Vector&)> evaluate;
  std::shared_ptr<const void> data;  // keeps the captured data alive

  /// Index of `name` (or an alias); throws UsageError.
  [[nodiscard]] Eigen::Index index_of(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> all_names() const;
};

/// Resolves names (and aliases) through the model.
RestrictionSpec parse_restriction(const std::string& text, const DataModel& model);

DataModel load_model(const std::string& id, const std::filesystem::path& data,
                     const ModelOptions& options = {});

FitResult fit_unrestricted(const DataModel& m, const OptimizeOptions& opt = {});
FitResult fit_restricted(const DataModel& m, const RestrictionSpec& spec, const Vector& start,
                         const OptimizeOptions& opt = {});

struct HypothesisReport {
  FitResult unrestricted;
  FitResult restricted;
  std::vector<std::pair<std::string, std::optional<TestOutcome>>> outcomes;
  std::vector<std::string> errors;  // per missing outcome
};

HypothesisReport test_hypothesis(const DataModel& m, const RestrictionSpec& spec, double level);

enum class CiMethod { Inversion, T };

/// LRC_alpha inversion over a single parameter, or the t interval.
/// With info := Hessian the subvector form is used (it needs only the
/// nuisance block of H to be positive definite at the restricted fit).
ConfidenceInterval parameter_interval(const DataModel& m, const FitResult& unrestricted,
                                      Eigen::Index param, double level, CiMethod method);

// --- configuration and entry points -----------------------------------------

struct PowerGrid {
  double from = -8.0;
  double to = -2.0;
  double step = 0.1;
};

/// JSON experiment config plus harness-only fields.
struct FileConfig {
  ExperimentConfig experiment;
  std::optional<PowerGrid> grid;
  TestKind calibrate_test = TestKind::LRCa;
  std::optional<int> calibrate_df;
  std::vector<std::string> formats{"csv", "md"};
};

/// Unknown keys and wrongly typed values raise UsageError naming the field.
FileConfig parse_config(const std::string& json_text);
FileConfig load_config(const std::filesystem::path& path);

/// Parameter names, bounds, restriction syntax and data format.
std::string describe(const std::string& model_id);

/// Full command-line entry: 0 success, 1 usage error, 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lrca::cli
