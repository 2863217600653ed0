#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpjet {

enum class ErrorCode {
  InvalidArgument,
  NoRealRoot,
  SingularAssembly,
  IntegrationFailure,
  PoleSingularity,
  NegativeRatio,
  UnstableRegime,
  NonPositiveRatio,
  NotPositiveDefinite,
  DegenerateData,
  NestedDesignViolation,
  GridExhausted,
  GeometryOverflow,
  RowMismatch,
  NoDeposition,
  OutOfDomain,
  EmptyTrace,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace gpjet
