#include "tikdyn/error.hpp"

namespace tikdyn {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid parameter";
    case ErrorCode::kUnsupportedObjective: return "unsupported objective";
    case ErrorCode::kWrongBranch: return "wrong branch";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kAbortedRun: return "aborted run";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kInfeasible: return "infeasible parameters";
  }
  return "unknown error";
}

void Throw(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tikdyn
