#pragma once

#include <stdexcept>
#include <string>

namespace ucv {

// Failure modes surfaced to callers. Estimator nonexistence (singular
// normal matrices, degenerate leverage, ...) is reported through these
// codes so study drivers can tally it per method instead of aborting.
enum class ErrorCode {
  RankDeficient,
  EmptyCluster,
  ShapeMismatch,
  SingularPsi,
  SingularPhi,
  SingularSc,
  SingularOuter,
  TooFewClusters,
  DegenerateLeverage,
  AllSingletons,
  SingletonCluster,
  NonpositiveTrace,
  SingularMomentSystem,
  NonpositiveDenominator,
  InvalidNu,
  NonpositiveVariance,
  NotDivisible,
  NonpositiveSize,
  EmptySubsample,
  TooLargeForOracle,
  SingularCore,
  SingularA,
  SingularPanelSystem,
  RaggedPanel,
  ParseError,
  ConfigError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace ucv
