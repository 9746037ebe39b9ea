#pragma once

#include <stdexcept>
#include <string>

namespace lqdim {

/// Bad user-supplied data: malformed vectors, out-of-range parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's documented precondition.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A word symbol exceeds the size of the rule it is read against.
class InvalidWord : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// The requested computation would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lqdim
