#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cnf {

enum class ErrorCode {
  // SMILES parsing
  EmptyInput,
  UnbalancedParenthesis,
  UnmatchedRingClosure,
  UnknownElement,
  MultiFragmentInput,
  MalformedBracketAtom,
  InvalidBond,
  SyntaxError,
  // graph utilities
  InvalidGraph,
  InvalidOrder,
  SizeLimitExceeded,
  // featurization
  EmptyCorpus,
  TooLong,
  // model
  ShapeMismatch,
  NonFiniteActivation,
  NonFiniteLoss,
  StaleCache,
  InvalidConfig,
  // ensemble
  EmptyOutputs,
  AllVariantsRejected,
  // harness
  MissingColumn,
  EmptyDataset,
  TooFewRecords,
  LengthMismatch,
  SingleClass,
  DegenerateGrouping,
  IoError,
  FormatError,
  LeakageDetected,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the typed codes above so
/// callers (and the CLI) can report it without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace cnf
