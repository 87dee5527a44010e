#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sociallearn {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NegativeWeight,
  RowSumViolation,
  NotStronglyConnected,
  InvalidModel,
  OutOfSupport,
  QuadratureNotConverged,
  MgfDiverges,
  ZeroPrior,
  AllZeroPosterior,
  AllZeroMessage,
  AbsorbedBelief,
  UnboundedRatios,
  SupremumAtInfinity,
  InfeasiblePreimage,
  PathSpaceTooLarge,
  ParseError,
  ValidationError,
  UnknownFigure,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI and the replication runner can classify it without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace sociallearn
