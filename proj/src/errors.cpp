#include "ucv/errors.hpp"

namespace ucv {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularPsi: return "SingularPsi";
    case ErrorCode::SingularPhi: return "SingularPhi";
    case ErrorCode::SingularSc: return "SingularSc";
    case ErrorCode::SingularOuter: return "SingularOuter";
    case ErrorCode::TooFewClusters: return "TooFewClusters";
    case ErrorCode::DegenerateLeverage: return "DegenerateLeverage";
    case ErrorCode::AllSingletons: return "AllSingletons";
    case ErrorCode::SingletonCluster: return "SingletonCluster";
    case ErrorCode::NonpositiveTrace: return "NonpositiveTrace";
    case ErrorCode::SingularMomentSystem: return "SingularMomentSystem";
    case ErrorCode::NonpositiveDenominator: return "NonpositiveDenominator";
    case ErrorCode::InvalidNu: return "InvalidNu";
    case ErrorCode::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::NonpositiveSize: return "NonpositiveSize";
    case ErrorCode::EmptySubsample: return "EmptySubsample";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::SingularCore: return "SingularCore";
    case ErrorCode::SingularA: return "SingularA";
    case ErrorCode::SingularPanelSystem: return "SingularPanelSystem";
    case ErrorCode::RaggedPanel: return "RaggedPanel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
      code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ucv
