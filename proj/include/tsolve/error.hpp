#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsolve {

/// Thrown when a caller violates a documented precondition (dimension
/// mismatch, out-of-range order, nonpositive parameter, ...).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by the Matrix Market reader. `line()` is 1-based; 0 means the
/// error is not tied to a particular line (e.g. premature end of input).
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

} // namespace tsolve
