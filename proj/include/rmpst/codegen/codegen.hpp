#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rmpst/cfsm/cfsm.hpp"
#include "rmpst/refine/typing.hpp"
#include "rmpst/runtime/endpoint.hpp"

namespace rmpst {

struct GeneratedFile {
  std::string name;
  std::string content;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// C++ endpoint API for one role: state records without erased fields, a
/// callback interface, and `run(callbacks, connection)`. Byte-identical for
/// identical machines.
std::vector<GeneratedFile> generate(const Cfsm& m, const std::string& protocol);

/// Valid C++ identifier derived from a protocol-level name.
std::string cpp_identifier(std::string_view name);

// Chooser decision lists, one decision per line:
//   <state> <label>[(<payload expr>)] when <guard>
//   <state> <label>[(<payload expr>)] otherwise
// `#` starts a comment.
using ChooserSpec = std::map<int, std::vector<rt::Decision>>;

ChooserSpec parse_chooser(std::string_view text);

/// Per send state: each decision implies its label's refinement, and the list is total.
std::map<int, ChooserReport> check_choosers(const Cfsm& m, const ChooserSpec& spec, const Oracle& oracle);

}  // namespace rmpst
