#include "sociallearn/error.hpp"

namespace sociallearn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::MgfDiverges: return "MgfDiverges";
    case ErrorCode::ZeroPrior: return "ZeroPrior";
    case ErrorCode::AllZeroPosterior: return "AllZeroPosterior";
    case ErrorCode::AllZeroMessage: return "AllZeroMessage";
    case ErrorCode::AbsorbedBelief: return "AbsorbedBelief";
    case ErrorCode::UnboundedRatios: return "UnboundedRatios";
    case ErrorCode::SupremumAtInfinity: return "SupremumAtInfinity";
    case ErrorCode::InfeasiblePreimage: return "InfeasiblePreimage";
    case ErrorCode::PathSpaceTooLarge: return "PathSpaceTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownFigure: return "UnknownFigure";
  }
  return "Unknown";
}

}  // namespace sociallearn
