#include "cnf/error.hpp"

namespace cnf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case ErrorCode::UnmatchedRingClosure: return "UnmatchedRingClosure";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::MultiFragmentInput: return "MultiFragmentInput";
    case ErrorCode::MalformedBracketAtom: return "MalformedBracketAtom";
    case ErrorCode::InvalidBond: return "InvalidBond";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::TooLong: return "TooLong";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyOutputs: return "EmptyOutputs";
    case ErrorCode::AllVariantsRejected: return "AllVariantsRejected";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DegenerateGrouping: return "DegenerateGrouping";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
  }
  return "Unknown";
}

}  // namespace cnf
