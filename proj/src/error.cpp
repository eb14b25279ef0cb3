#include "delib/error.hpp"

namespace delib {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::ZeroPreVariance: return "ZeroPreVariance";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::DegenerateDeviations: return "DegenerateDeviations";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::DegenerateExpected: return "DegenerateExpected";
    case ErrorCode::UnequalRaterCounts: return "UnequalRaterCounts";
    case ErrorCode::MissingRatings: return "MissingRatings";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::LeverageOne: return "LeverageOne";
    case ErrorCode::MissingAgendaLevels: return "MissingAgendaLevels";
    case ErrorCode::RoomAgendaEmpty: return "RoomAgendaEmpty";
    case ErrorCode::MissingFewShots: return "MissingFewShots";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::TransportExhausted: return "TransportExhausted";
    case ErrorCode::CacheWrite: return "CacheWrite";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow:
    case ErrorCode::OutOfRange:
    case ErrorCode::DuplicateKey:
    case ErrorCode::InvalidParams:
    case ErrorCode::MissingFewShots:
    case ErrorCode::MissingRatings:
    case ErrorCode::UnequalRaterCounts:
      return true;
    default:
      return false;
  }
}

}  // namespace delib
