#include "error.h"

namespace nwsil {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kReservedToken: return "ReservedToken";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kNonFiniteCost: return "NonFiniteCost";
    case ErrorCode::kOracleTooLarge: return "OracleTooLarge";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTooFewSentences: return "TooFewSentences";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace nwsil
