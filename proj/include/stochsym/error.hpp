#pragma once

#include <stdexcept>
#include <string>

namespace stochsym {

/// Base of every error raised by the library. `kind()` is the short
/// machine-readable tag the CLI puts into its structured error object.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t column)
      : Error("syntax", message + " at column " + std::to_string(column)), column_(column) {}

  /// 1-based column of the offending character.
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t column)
      : Error("unknown_identifier",
              "unknown identifier '" + name + "' at column " + std::to_string(column)),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& var)
      : Error("unbound_variable", "variable '" + var + "' is not bound") {}
};

/// Singular evaluation: division by zero, log of a non-positive value,
/// a non-finite intermediate, a map leaving its domain of definition.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

/// A numeric identity test or sampled solve could not reach a verdict.
class IndeterminateError : public Error {
 public:
  explicit IndeterminateError(const std::string& message) : Error("indeterminate", message) {}
};

/// Input violates a precondition or a validation check.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("numerical", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace stochsym
