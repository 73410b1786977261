#include "rmpst/frontend/lexer.hpp"

#include <cctype>

namespace rmpst {

std::string to_string(const Diagnostic& d) {
  const char* sev = d.severity == Severity::Error     ? "error"
                    : d.severity == Severity::Warning ? "warning"
                                                      : "note";
  return std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " + sev + ": " +
         d.message;
}

bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

std::string_view to_string(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Assign: return "':='";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::Bang: return "'!'";
    case Tok::Question: return "'?'";
    case Tok::Caret: return "'^'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'<>'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Span span{line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), span});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      auto digits = std::string(text.substr(i, j - i));
      if (digits.size() > 19 || (digits.size() == 19 && digits > "9223372036854775807"))
        throw ParseError({Severity::Error, "integer literal out of range", span});
      out.push_back({Tok::Int, digits, span});
      advance(j - i);
      continue;
    }
    auto two = text.substr(i, 2);
    struct P {
      std::string_view s;
      Tok t;
    };
    static const P puncts[] = {
        {":=", Tok::Assign}, {"->", Tok::Arrow}, {"<=", Tok::Le},  {">=", Tok::Ge},
        {"<>", Tok::Ne},     {"!=", Tok::Ne},    {"==", Tok::Eq},  {"&&", Tok::AndAnd},
        {"||", Tok::OrOr},   {"(", Tok::LParen}, {")", Tok::RParen}, {"{", Tok::LBrace},
        {"}", Tok::RBrace},  {"[", Tok::LBracket}, {"]", Tok::RBracket}, {",", Tok::Comma},
        {";", Tok::Semi},    {":", Tok::Colon},  {".", Tok::Dot},  {"!", Tok::Bang},
        {"?", Tok::Question}, {"^", Tok::Caret}, {"<", Tok::Lt},   {">", Tok::Gt},
        {"=", Tok::Eq},      {"+", Tok::Plus},   {"-", Tok::Minus}, {"*", Tok::Star},
    };
    bool matched = false;
    for (const auto& p : puncts) {
      if (p.s.size() == 2 ? two == p.s : c == p.s[0]) {
        out.push_back({p.t, std::string(p.s), span});
        advance(p.s.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      std::string shown(1, c);
      if (static_cast<unsigned char>(c) >= 0x80) shown = "non-ASCII byte";
      throw ParseError({Severity::Error, "unexpected character '" + shown + "'", span});
    }
  }
  out.push_back({Tok::Eof, "", Span{line, col}});
  return out;
}

}  // namespace rmpst
