#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrca {

enum class ErrorKind {
  // numeric
  NotPositiveDefinite,
  DimensionMismatch,
  AsymmetricMatrix,
  NonFiniteValue,
  InvalidProbability,
  NegativeStatistic,
  NonFiniteEvaluation,
  // inference
  RankDeficientJacobian,
  SampleSizeMismatch,
  RestrictionViolated,
  CenterRejected,
  NoBracket,
  NonPositiveSE,
  // optimize
  InfeasibleStart,
  MaxIterations,
  // models
  NonStationary,
  NonPositiveVariance,
  SingularDesign,
  NonPositiveShape,
  NonPositiveTime,
  DegenerateDenominator,
  NonPositiveIdiosyncraticVariance,
  UnbalancedPanel,
  InvalidData,
  // montecarlo / cli
  ConfigInvalid,
  UnknownModel,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers branch
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lrca
