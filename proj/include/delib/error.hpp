#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace delib {

enum class ErrorCode {
  // input validation
  MalformedRow,
  OutOfRange,
  DuplicateKey,
  InvalidParams,
  // metrics / inference
  LengthMismatch,
  TooFewRows,
  TooFewItems,
  ZeroPreVariance,
  DegenerateVariance,
  ZeroVariance,
  AllZeroDifferences,
  DegenerateDeviations,
  EmptyInput,
  // irr
  DegenerateLabels,
  DegenerateExpected,
  UnequalRaterCounts,
  MissingRatings,
  // regression
  RankDeficient,
  LeverageOne,
  MissingAgendaLevels,
  RoomAgendaEmpty,
  // annotate
  MissingFewShots,
  Unparseable,
  TransportExhausted,
  CacheWrite,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes that stem from bad user input rather than degenerate data.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, message prefixed with context (e.g. a file name).
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// A value that may be missing for a recorded reason. Batch computations
/// use it so one degenerate input does not abort the rest.
template <class T>
struct Fallible {
  std::optional<T> value;
  std::string error;  // empty when value is set

  bool ok() const noexcept { return value.has_value(); }
};

/// Runs fn, capturing a thrown delib::Error as the failure reason.
template <class Fn>
auto attempt(Fn&& fn) -> Fallible<decltype(fn())> {
  try {
    return {fn(), {}};
  } catch (const Error& e) {
    return {std::nullopt, std::string(e.what())};
  }
}

}  // namespace delib
