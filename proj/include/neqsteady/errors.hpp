#pragma once

#include <stdexcept>
#include <string>

namespace neqsteady {

// Two error families drive the CLI exit-code contract:
//   ValidationError -> exit 2 (bad input, violated precondition)
//   NumericalError  -> exit 3 (a solver or quadrature could not deliver)
// Every throw site tags a stable code string so tests can match on it.

class NeqError : public std::runtime_error {
public:
  NeqError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

class ValidationError : public NeqError {
public:
  using NeqError::NeqError;
};

class NumericalError : public NeqError {
public:
  using NeqError::NeqError;
};

[[noreturn]] inline void fail_validation(const std::string& code, const std::string& what) {
  throw ValidationError(code, what);
}

[[noreturn]] inline void fail_numerical(const std::string& code, const std::string& what) {
  throw NumericalError(code, what);
}

}  // namespace neqsteady
