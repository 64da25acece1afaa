#include "racint/error.hpp"

namespace racint {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kOutOfDomain: return "out-of-domain";
    case ErrorKind::kInvalidLayout: return "invalid-layout";
    case ErrorKind::kInvalidState: return "invalid-state";
    case ErrorKind::kLookup: return "lookup";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kSingularFit: return "singular-fit";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace racint
