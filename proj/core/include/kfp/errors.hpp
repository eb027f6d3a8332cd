#pragma once

#include <stdexcept>
#include <string>

namespace kfp {

/// Raised when an operation's precondition is violated by its arguments.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a time integration produces a non-finite state or an
/// eigensolver fails to converge.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace kfp
