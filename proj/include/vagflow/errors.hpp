#ifndef VAGFLOW_ERRORS_HPP
#define VAGFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vagflow {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (mesh or config file). Carries a 1-based position.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// Well-formed input that violates a mathematical or cross-field requirement.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Nonlinear or linear solver breakdown.
class SolverError : public Error {
public:
  using Error::Error;
};

} // namespace vagflow

#endif
