#pragma once

#include <stdexcept>
#include <string>

namespace racint {

enum class ErrorKind {
  kInvalidInput,
  kOutOfDomain,
  kInvalidLayout,
  kInvalidState,
  kLookup,
  kConvergence,
  kSingularFit,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so front ends can map it
/// to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::kInvalidInput, what);
}

}  // namespace racint
