#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace f3dgs {

enum class ErrorCode {
  kDegenerateInput,
  kShapeMismatch,
  kNonFiniteLoss,
  kDimensionMismatch,
  kWindowTooLarge,
  kBadMagic,
  kUnsupportedVersion,
  kCrcMismatch,
  kTruncated,
  kIo,
  kConfig,
  kOutOfRange,
  kParse,
};

/// Stable lowercase token used in CLI error lines, e.g. "crc_mismatch".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace f3dgs
