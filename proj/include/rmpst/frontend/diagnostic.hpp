#pragma once

#include <string>
#include <vector>

#include "rmpst/core/error.hpp"

namespace rmpst {

struct Span {
  int line = 1;
  int column = 1;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  Span span;
};

std::string to_string(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& ds);

class ParseError : public Error {
 public:
  explicit ParseError(Diagnostic d) : Error(to_string(d)), diagnostic_(std::move(d)) {}
  const Diagnostic& diagnostic() const { return diagnostic_; }

 private:
  Diagnostic diagnostic_;
};

}  // namespace rmpst
