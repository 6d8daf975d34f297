#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracgm {

enum class ErrorCode {
  kInvalidArgument,
  kInsufficientData,
  kDegenerateProblem,
  kDegenerateGeometry,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code survives
/// across language boundaries; what() is prefixed with its name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace fracgm
