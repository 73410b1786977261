#pragma once

#include <stdexcept>
#include <string>

namespace rmpst {

/// Base class of every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a type constructor is given arguments violating an AST
/// invariant (duplicate labels, self-messages, non-contractive recursion).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// The fourth case of context extension: an existing entry conflicts.
class UndefinedExtension : public Error {
 public:
  explicit UndefinedExtension(const std::string& var)
      : Error("undefined context extension for variable '" + var + "'"), var_(var) {}
  const std::string& var() const { return var_; }

 private:
  std::string var_;
};

}  // namespace rmpst
