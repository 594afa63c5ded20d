#pragma once

#include <stdexcept>
#include <string>

namespace tikdyn {

enum class ErrorCode {
  kInvalidParameter,
  kUnsupportedObjective,
  kWrongBranch,
  kPrecondition,
  kAbortedRun,
  kInsufficientData,
  kDomain,
  kIo,
  kConfig,
  kInfeasible,
};

const char* ToString(ErrorCode code);

// All library failures are reported through this type (or a subclass), so
// the C boundary can map them onto status codes without loss.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Throw(ErrorCode code, const std::string& what);

inline void Require(bool condition, ErrorCode code, const char* what) {
  if (!condition) Throw(code, what);
}

}  // namespace tikdyn
