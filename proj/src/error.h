#ifndef NWSIL_ERROR_H_
#define NWSIL_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace nwsil {

// Values mirror the NWSIL_E_* codes of the C API.
enum class ErrorCode {
  kIo = 1,
  kMalformedHeader,
  kArityMismatch,
  kZeroVector,
  kReservedToken,
  kUnknownToken,
  kDegenerateVector,
  kNonFiniteCost,
  kOracleTooLarge,
  kEmptyInput,
  kIndexOutOfRange,
  kEmptyCorpus,
  kTooFewSentences,
  kConfig,
  kInvalidArgument,
  kInternal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(what), code_(code), line_(line) {}

  ErrorCode code() const { return code_; }
  // 1-based line in the offending input file, when one applies.
  std::optional<std::size_t> line() const { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace nwsil

#endif  // NWSIL_ERROR_H_
