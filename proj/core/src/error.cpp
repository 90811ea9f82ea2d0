#include "lrca/error.hpp"

namespace lrca {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::NegativeStatistic: return "NegativeStatistic";
    case ErrorKind::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::RankDeficientJacobian: return "RankDeficientJacobian";
    case ErrorKind::SampleSizeMismatch: return "SampleSizeMismatch";
    case ErrorKind::RestrictionViolated: return "RestrictionViolated";
    case ErrorKind::CenterRejected: return "CenterRejected";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NonPositiveSE: return "NonPositiveSE";
    case ErrorKind::InfeasibleStart: return "InfeasibleStart";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::NonStationary: return "NonStationary";
    case ErrorKind::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::NonPositiveShape: return "NonPositiveShape";
    case ErrorKind::NonPositiveTime: return "NonPositiveTime";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::NonPositiveIdiosyncraticVariance:
      return "NonPositiveIdiosyncraticVariance";
    case ErrorKind::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::UnknownModel: return "UnknownModel";
  }
  return "Unknown";
}

}  // namespace lrca
