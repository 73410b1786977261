#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rmpst/frontend/diagnostic.hpp"

namespace rmpst {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Assign,  // :=
  Dot,
  Arrow,  // ->
  Bang,
  Question,
  Caret,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Ne,
  AndAnd,
  OrOr,
  Plus,
  Minus,
  Star,
  Eof,
};

std::string_view to_string(Tok t);

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

/// Splits the input into tokens; `//` comments and whitespace are skipped.
/// Throws ParseError on a stray character or an out-of-range literal.
std::vector<Token> lex(std::string_view text);

}  // namespace rmpst
