#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/core/types.hpp"
#include "rmpst/frontend/diagnostic.hpp"

namespace rmpst {

// ---------------------------------------------------------------- surface AST

struct Stmt;
using Block = std::vector<Stmt>;

struct MessageStmt {
  std::string label;
  std::string var;
  RefinementType type;
  Role from;
  Role to;
};

struct ChoiceStmt {
  Role at;
  std::vector<Block> blocks;
};

struct RoleArg {
  Role role;
  std::vector<Expr> state;
  Span span;
};

struct DoStmt {
  std::string protocol;
  std::vector<RoleArg> args;
};

struct RecStmt {
  std::string tvar;
  Block body;
};

struct ContinueStmt {
  std::string tvar;
};

struct Stmt {
  std::variant<MessageStmt, ChoiceStmt, DoStmt, RecStmt, ContinueStmt> value;
  Span span;
};

struct StateDecl {
  std::string var;
  RefinementType type;
};

struct RoleDecl {
  Role role;
  std::vector<StateDecl> state;
};

struct ProtocolDef {
  std::string name;
  bool aux = false;
  std::vector<RoleDecl> roles;
  Block body;
  /// Set for `global type Name = G;` declarations.
  std::optional<GlobalType> core;
  Span span;
};

/// A parsed source file: the main (first non-aux) protocol plus every aux
/// protocol it may enter.
struct ProtocolDecl {
  std::string name;
  std::vector<Role> roles;
  ProtocolDef main;
  std::vector<ProtocolDef> aux_protocols;

  const ProtocolDef* find_aux(const std::string& name) const;
};

struct ParseResult {
  std::optional<ProtocolDecl> decl;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return decl.has_value() && !has_errors(diagnostics); }
};

/// Parses a `.rscr` source. Never throws on malformed input; problems are
/// reported as diagnostics.
ParseResult parse_protocol(std::string_view text);

// ----------------------------------------------------------------- core syntax
// These throw ParseError.

Expr parse_expr(std::string_view text);
RefinementType parse_refinement(std::string_view text);
GlobalType parse_global(std::string_view text);
LocalType parse_local(std::string_view text);
GlobalContext parse_global_context(std::string_view text);
LocalContext parse_local_context(std::string_view text);

// ------------------------------------------------------------------- desugar

enum class DesugarErrorKind { NonDirectedChoice, UnsupportedNesting, UnknownProtocol, Invariant };

class DesugarError : public Error {
 public:
  DesugarError(DesugarErrorKind kind, const std::string& msg, Span span)
      : Error(msg), kind_(kind), span_(span) {}
  DesugarErrorKind kind() const { return kind_; }
  Span span() const { return span_; }

 private:
  DesugarErrorKind kind_;
  Span span_;
};

/// Lowers the surface protocol to a core global type; aux protocols are
/// inlined as recursions.
GlobalType desugar(const ProtocolDecl& decl);

/// parse_protocol followed by desugar; diagnostics from both stages land in
/// `diagnostics`.
std::optional<GlobalType> load_protocol(std::string_view text, std::vector<Diagnostic>& diagnostics,
                                        std::string* name = nullptr);

}  // namespace rmpst
