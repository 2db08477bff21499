#pragma once

#include <stdexcept>
#include <string>

namespace asep {

enum class ErrorKind {
  InvalidArgument,  // bad input to an operation
  Compute,          // solver/quadrature failure, invariant violation
  Config,           // config parse or validation failure
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace asep
