#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bhlab {

enum class ErrorCode {
  SchedulingInPast,
  UnknownNode,
  InvalidSpec,
  DuplicateTerminal,
  TooFewRows,
  IoError,
  SchemaError,
  InsufficientClassCount,
  SingleClassTraining,
  UntrainedModel,
  WidthMismatch,
  LengthMismatch,
  EmptyInput,
  SingleClassTruth,
  MalformedCurve,
  OutOfRange,
  ConfigError,
  SingleClassDataset,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (tests, the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bhlab
