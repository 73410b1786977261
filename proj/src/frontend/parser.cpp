#include "rmpst/frontend/parser.hpp"

#include <map>
#include <set>

#include "rmpst/core/error.hpp"
#include "rmpst/frontend/lexer.hpp"

namespace rmpst {

const ProtocolDef* ProtocolDecl::find_aux(const std::string& n) const {
  for (const auto& a : aux_protocols)
    if (a.name == n) return &a;
  return nullptr;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {
    for (const auto& t : toks_)
      if (t.kind == Tok::Ident) idents_.insert(t.text);
  }

  // --------------------------------------------------------------- helpers

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok t) const { return peek().kind == t; }
  bool at_kw(std::string_view kw) const { return at(Tok::Ident) && peek().text == kw; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek().span, msg); }
  [[noreturn]] static void fail_at(Span s, const std::string& msg) {
    throw ParseError({Severity::Error, msg, s});
  }
  const Token& expect(Tok t) {
    if (!at(t)) fail("expected " + std::string(to_string(t)) + ", found " + describe(peek()));
    return next();
  }
  void expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail("expected '" + std::string(kw) + "', found " + describe(peek()));
    next();
  }
  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident || t.kind == Tok::Int) return "'" + t.text + "'";
    return std::string(to_string(t.kind));
  }
  std::string ident(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what + ", found " + describe(peek()));
    return next().text;
  }
  void expect_eof() {
    if (!at(Tok::Eof)) fail("unexpected " + describe(peek()) + " after end of term");
  }

  std::string fresh_var() {
    for (;;) {
      std::string n = "_" + std::to_string(++fresh_);
      if (!idents_.count(n)) return n;
    }
  }

  // ----------------------------------------------------------- expressions

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr e = and_expr();
    while (accept(Tok::OrOr)) e = Expr::binary(BinaryOp::Or, e, and_expr());
    return e;
  }
  Expr and_expr() {
    Expr e = cmp_expr();
    while (accept(Tok::AndAnd)) e = Expr::binary(BinaryOp::And, e, cmp_expr());
    return e;
  }
  Expr cmp_expr() {
    Expr e = add_expr();
    static const std::pair<Tok, BinaryOp> ops[] = {
        {Tok::Eq, BinaryOp::Eq}, {Tok::Ne, BinaryOp::Ne}, {Tok::Lt, BinaryOp::Lt},
        {Tok::Le, BinaryOp::Le}, {Tok::Gt, BinaryOp::Gt}, {Tok::Ge, BinaryOp::Ge}};
    for (const auto& [t, op] : ops) {
      if (accept(t)) {
        e = Expr::binary(op, e, add_expr());
        for (const auto& [t2, op2] : ops) {
          (void)op2;
          if (at(t2)) fail("comparison operators do not associate; add parentheses");
        }
        break;
      }
    }
    return e;
  }
  Expr add_expr() {
    Expr e = mul_expr();
    for (;;) {
      if (accept(Tok::Plus)) e = Expr::binary(BinaryOp::Add, e, mul_expr());
      else if (accept(Tok::Minus)) e = Expr::binary(BinaryOp::Sub, e, mul_expr());
      else return e;
    }
  }
  Expr mul_expr() {
    Expr e = unary_expr();
    while (accept(Tok::Star)) e = Expr::binary(BinaryOp::Mul, e, unary_expr());
    return e;
  }
  Expr unary_expr() {
    if (accept(Tok::Bang)) return Expr::unary(UnaryOp::Not, unary_expr());
    if (at(Tok::Minus)) {
      next();
      if (at(Tok::Int)) {
        auto t = next();
        if (t.text == "9223372036854775808") return Expr::integer(INT64_MIN);
        return Expr::integer(-std::stoll(t.text));
      }
      return Expr::unary(UnaryOp::Neg, unary_expr());
    }
    return atom();
  }
  Expr atom() {
    if (at(Tok::Int)) return Expr::integer(std::stoll(next().text));
    if (accept(Tok::LParen)) {
      Expr e = expr();
      expect(Tok::RParen);
      return e;
    }
    if (at(Tok::Ident)) {
      auto name = next().text;
      if (name == "true") return Expr::boolean(true);
      if (name == "false") return Expr::boolean(false);
      if (name == "not") return Expr::unary(UnaryOp::Not, unary_expr());
      return Expr::var(name);
    }
    fail("expected an expression, found " + describe(peek()));
  }

  // ----------------------------------------------------------------- types

  bool at_base() const {
    return at(Tok::Ident) && (peek().text == "int" || peek().text == "bool" ||
                              peek().text == "string" || peek().text == "unit");
  }
  BaseType base() {
    auto t = peek();
    if (!at_base()) fail("expected a base type (int, bool, string, unit), found " + describe(t));
    next();
    if (t.text == "int") return BaseType::Int;
    if (t.text == "bool") return BaseType::Bool;
    if (t.text == "string") return BaseType::String;
    return BaseType::Unit;
  }
  Expr opt_pred() {
    if (!accept(Tok::LBrace)) return Expr();
    Expr e = expr();
    expect(Tok::RBrace);
    return e;
  }

  // Payload inside `l( ... )`: empty, `x:S{E}`, `x:S`, `S{E}`, `S`, `{E}`.
  std::pair<std::string, RefinementType> payload() {
    if (at(Tok::RParen)) {
      auto v = fresh_var();
      return {v, RefinementType::plain(BaseType::Unit, v)};
    }
    if (at(Tok::LBrace)) {
      auto v = fresh_var();
      return {v, RefinementType{v, BaseType::Unit, opt_pred()}};
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::Colon) {
      auto v = next().text;
      next();
      auto b = base();
      return {v, RefinementType{v, b, opt_pred()}};
    }
    auto v = fresh_var();
    auto b = base();
    return {v, RefinementType{v, b, opt_pred()}};
  }

  RefinementType refinement() {
    std::string v = "_v";
    if (at(Tok::Ident) && peek(1).kind == Tok::Colon) {
      v = next().text;
      next();
    }
    auto b = base();
    return RefinementType{v, b, opt_pred()};
  }

  RoleSet role_set_braced() {
    expect(Tok::LBrace);
    RoleSet rs;
    if (!at(Tok::RBrace)) {
      do rs.insert(Role{ident("role name")});
      while (accept(Tok::Comma));
    }
    expect(Tok::RBrace);
    return rs;
  }

  Mult mult() {
    if (at(Tok::Int) && peek().text == "0") {
      next();
      return Mult::Zero;
    }
    if (at_kw("w") || at_kw("omega")) {
      next();
      return Mult::Omega;
    }
    fail("expected multiplicity 'w' or '0', found " + describe(peek()));
  }

  // -------------------------------------------------------- type variables

  struct RecScope {
    std::string tvar;
    std::vector<std::string> vars;
  };
  std::vector<RecScope> recs_;

  std::vector<Expr> tvar_args(const std::string& t) {
    const RecScope* scope = nullptr;
    for (auto it = recs_.rbegin(); it != recs_.rend(); ++it)
      if (it->tvar == t) {
        scope = &*it;
        break;
      }
    if (!accept(Tok::LParen)) return {};
    std::vector<Expr> positional;
    std::map<std::string, Expr> named;
    Span start = peek().span;
    if (!at(Tok::RParen)) {
      do {
        if (at(Tok::Ident) && peek(1).kind == Tok::Assign) {
          Span s = peek().span;
          auto name = next().text;
          next();
          if (!scope) fail_at(s, "named argument for unbound type variable '" + t + "'");
          if (!named.emplace(name, expr()).second) fail_at(s, "duplicate argument '" + name + "'");
        } else {
          positional.push_back(expr());
        }
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    if (!named.empty() && !positional.empty())
      fail_at(start, "cannot mix named and positional arguments");
    if (named.empty()) {
      if (scope && positional.size() != scope->vars.size())
        fail_at(start, "type variable '" + t + "' expects " + std::to_string(scope->vars.size()) +
                           " arguments");
      return positional;
    }
    std::vector<Expr> args;
    for (const auto& v : scope->vars) {
      auto it = named.find(v);
      args.push_back(it == named.end() ? Expr::var(v) : it->second);
      if (it != named.end()) named.erase(it);
    }
    if (!named.empty()) fail_at(start, "'" + named.begin()->first + "' is not a state variable of '" + t + "'");
    return args;
  }

  // ---------------------------------------------------------- global types

  GlobalType global() {
    Span s = peek().span;
    try {
      return global_inner();
    } catch (const InvariantViolation& e) {
      fail_at(s, e.what());
    }
  }

  GlobalType global_inner() {
    if (accept(Tok::LParen)) {
      auto g = global();
      expect(Tok::RParen);
      return g;
    }
    if (accept_kw("end")) return GlobalType::end();
    if (at_kw("rec") && peek(1).kind == Tok::Ident) {
      next();
      auto t = ident("type variable");
      std::vector<GStateVar> vars;
      if (accept(Tok::LParen)) {
        do {
          GStateVar sv;
          sv.var = ident("state variable");
          if (accept(Tok::Caret)) sv.knowers = role_set_braced();
          expect(Tok::Colon);
          auto b = base();
          sv.type = RefinementType{sv.var, b, opt_pred()};
          expect(Tok::Assign);
          sv.init = expr();
          vars.push_back(std::move(sv));
        } while (accept(Tok::Comma));
        expect(Tok::RParen);
      }
      expect(Tok::Dot);
      RecScope scope{t, {}};
      for (const auto& v : vars) scope.vars.push_back(v.var);
      recs_.push_back(scope);
      auto body = global();
      recs_.pop_back();
      return GlobalType::rec(t, std::move(vars), body);
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::Arrow) {
      Role from{next().text};
      next();
      Role to{ident("receiver role")};
      expect(Tok::Colon);
      std::vector<GBranch> bs;
      Span s = peek().span;
      if (accept(Tok::LBrace)) {
        do bs.push_back(gbranch());
        while (accept(Tok::Semi));
        expect(Tok::RBrace);
      } else {
        bs.push_back(gbranch());
      }
      try {
        return GlobalType::message(from, to, std::move(bs));
      } catch (const InvariantViolation& e) {
        fail_at(s, e.what());
      }
    }
    if (at(Tok::Ident)) {
      auto t = next().text;
      return GlobalType::tvar(t, tvar_args(t));
    }
    fail("expected a global type, found " + describe(peek()));
  }

  GBranch gbranch() {
    GBranch b;
    b.label = ident("message label");
    expect(Tok::LParen);
    auto [v, t] = payload();
    expect(Tok::RParen);
    expect(Tok::Dot);
    b.var = v;
    b.type = t;
    b.cont = global();
    return b;
  }

  // ----------------------------------------------------------- local types

  LocalType local() {
    Span s = peek().span;
    try {
      return local_inner();
    } catch (const InvariantViolation& e) {
      fail_at(s, e.what());
    }
  }

  LocalType local_inner() {
    if (accept(Tok::LParen)) {
      auto l = local();
      expect(Tok::RParen);
      return l;
    }
    if (accept_kw("end")) return LocalType::end();
    if (accept(Tok::Lt)) {
      auto label = ident("label");
      expect(Tok::Gt);
      expect(Tok::LParen);
      auto [v, t] = payload();
      expect(Tok::RParen);
      expect(Tok::Dot);
      return LocalType::silent(label, v, t, local());
    }
    if (at_kw("rec") && peek(1).kind == Tok::Ident) {
      next();
      auto t = ident("type variable");
      std::vector<LStateVar> vars;
      if (accept(Tok::LParen)) {
        do {
          LStateVar sv;
          sv.var = ident("state variable");
          expect(Tok::Caret);
          sv.mult = mult();
          expect(Tok::Colon);
          auto b = base();
          sv.type = RefinementType{sv.var, b, opt_pred()};
          expect(Tok::Assign);
          sv.init = expr();
          vars.push_back(std::move(sv));
        } while (accept(Tok::Comma));
        expect(Tok::RParen);
      }
      expect(Tok::Dot);
      RecScope scope{t, {}};
      for (const auto& v : vars) scope.vars.push_back(v.var);
      recs_.push_back(scope);
      auto body = local();
      recs_.pop_back();
      return LocalType::rec(t, std::move(vars), body);
    }
    if (at(Tok::Ident) && (peek(1).kind == Tok::Bang || peek(1).kind == Tok::Question)) {
      Role peer{next().text};
      Dir dir = next().kind == Tok::Bang ? Dir::Send : Dir::Recv;
      std::vector<LBranch> bs;
      if (accept(Tok::LBrace)) {
        do bs.push_back(lbranch());
        while (accept(Tok::Semi));
        expect(Tok::RBrace);
      } else {
        bs.push_back(lbranch());
      }
      return LocalType::comm(dir, peer, std::move(bs));
    }
    if (at(Tok::Ident)) {
      auto t = next().text;
      return LocalType::tvar(t, tvar_args(t));
    }
    fail("expected a local type, found " + describe(peek()));
  }

  LBranch lbranch() {
    LBranch b;
    b.label = ident("message label");
    expect(Tok::LParen);
    auto [v, t] = payload();
    expect(Tok::RParen);
    expect(Tok::Dot);
    b.var = v;
    b.type = t;
    b.cont = local();
    return b;
  }

  // -------------------------------------------------------------- contexts

  GlobalContext global_context() {
    GlobalContext ctx;
    if (accept_kw("empty") || at(Tok::Eof)) return ctx;
    do {
      Span s = peek().span;
      auto v = ident("variable");
      expect(Tok::Caret);
      auto rs = role_set_braced();
      expect(Tok::Colon);
      auto b = base();
      RefinementType t{v, b, opt_pred()};
      if (ctx.contains(v)) fail_at(s, "duplicate context entry '" + v + "'");
      ctx = ctx.appended(GlobalEntry{v, rs, t});
    } while (accept(Tok::Comma));
    return ctx;
  }

  LocalContext local_context() {
    LocalContext ctx;
    if (accept_kw("empty") || at(Tok::Eof)) return ctx;
    do {
      Span s = peek().span;
      auto v = ident("variable");
      expect(Tok::Caret);
      auto m = mult();
      expect(Tok::Colon);
      auto b = base();
      RefinementType t{v, b, opt_pred()};
      if (ctx.contains(v)) fail_at(s, "duplicate context entry '" + v + "'");
      ctx = ctx.appended(LocalEntry{v, m, t});
    } while (accept(Tok::Comma));
    return ctx;
  }

  // ---------------------------------------------------------- surface syntax

  std::vector<ProtocolDef> file() {
    std::vector<ProtocolDef> defs;
    while (!at(Tok::Eof)) defs.push_back(definition());
    return defs;
  }

  ProtocolDef definition() {
    ProtocolDef def;
    def.span = peek().span;
    def.aux = accept_kw("aux");
    expect_kw("global");
    if (!def.aux && accept_kw("type")) {
      def.name = ident("protocol name");
      expect(Tok::Eq);
      def.core = global();
      expect(Tok::Semi);
      return def;
    }
    expect_kw("protocol");
    def.name = ident("protocol name");
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      do def.roles.push_back(role_decl());
      while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    def.body = block();
    return def;
  }

  RoleDecl role_decl() {
    expect_kw("role");
    RoleDecl rd;
    rd.role = Role{ident("role name")};
    if (accept(Tok::LBracket)) {
      do {
        StateDecl sd;
        sd.var = ident("state variable");
        expect(Tok::Colon);
        auto b = base();
        sd.type = RefinementType{sd.var, b, opt_pred()};
        rd.state.push_back(std::move(sd));
      } while (accept(Tok::Comma));
      expect(Tok::RBracket);
    }
    return rd;
  }

  Block block() {
    expect(Tok::LBrace);
    Block b;
    while (!at(Tok::RBrace)) {
      if (at(Tok::Eof)) fail("unterminated block, expected '}'");
      b.push_back(statement());
    }
    next();
    return b;
  }

  Stmt statement() {
    Stmt st;
    st.span = peek().span;
    if (at_kw("choice") && peek(1).kind == Tok::Ident && peek(1).text == "at") {
      next();
      next();
      ChoiceStmt c;
      c.at = Role{ident("role name")};
      c.blocks.push_back(block());
      while (accept_kw("or")) c.blocks.push_back(block());
      st.value = std::move(c);
      return st;
    }
    if (at_kw("do") && peek(1).kind == Tok::Ident && peek(2).kind == Tok::LParen) {
      next();
      DoStmt d;
      d.protocol = next().text;
      expect(Tok::LParen);
      if (!at(Tok::RParen)) {
        do {
          RoleArg ra;
          ra.span = peek().span;
          ra.role = Role{ident("role name")};
          if (accept(Tok::LBracket)) {
            do ra.state.push_back(expr());
            while (accept(Tok::Comma));
            expect(Tok::RBracket);
          }
          d.args.push_back(std::move(ra));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
      expect(Tok::Semi);
      st.value = std::move(d);
      return st;
    }
    if (at_kw("rec") && peek(1).kind == Tok::Ident && peek(2).kind == Tok::LBrace) {
      next();
      RecStmt r;
      r.tvar = next().text;
      r.body = block();
      st.value = std::move(r);
      return st;
    }
    if (at_kw("continue") && peek(1).kind == Tok::Ident) {
      next();
      st.value = ContinueStmt{next().text};
      expect(Tok::Semi);
      return st;
    }
    MessageStmt m;
    m.label = ident("message label or statement");
    expect(Tok::LParen);
    auto [v, t] = payload();
    m.var = v;
    m.type = t;
    expect(Tok::RParen);
    expect_kw("from");
    m.from = Role{ident("sender role")};
    expect_kw("to");
    m.to = Role{ident("receiver role")};
    expect(Tok::Semi);
    st.value = std::move(m);
    return st;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> idents_;
  int fresh_ = 0;
};

// ------------------------------------------------------------ static checks

struct Checker {
  const std::vector<ProtocolDef>& defs;
  std::vector<Diagnostic>& diags;

  const ProtocolDef* find(const std::string& n) const {
    for (const auto& d : defs)
      if (d.name == n) return &d;
    return nullptr;
  }

  void error(Span s, std::string msg) { diags.push_back({Severity::Error, std::move(msg), s}); }

  void check_role(const ProtocolDef& def, const Role& r, Span s) {
    for (const auto& rd : def.roles)
      if (rd.role == r) return;
    error(s, "unknown role '" + r.name + "' in protocol '" + def.name + "'");
  }

  void check_block(const ProtocolDef& def, const Block& b, std::vector<std::string>& recs) {
    for (const auto& st : b) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, MessageStmt>) {
              check_role(def, n.from, st.span);
              check_role(def, n.to, st.span);
              if (n.from == n.to) error(st.span, "role '" + n.from.name + "' sends to itself");
            } else if constexpr (std::is_same_v<T, ChoiceStmt>) {
              check_role(def, n.at, st.span);
              for (const auto& blk : n.blocks) check_block(def, blk, recs);
            } else if constexpr (std::is_same_v<T, DoStmt>) {
              check_do(def, n, st.span);
            } else if constexpr (std::is_same_v<T, RecStmt>) {
              recs.push_back(n.tvar);
              check_block(def, n.body, recs);
              recs.pop_back();
            } else {
              bool found = false;
              for (const auto& r : recs) found = found || r == n.tvar;
              if (!found) error(st.span, "'continue " + n.tvar + "' outside a matching 'rec'");
            }
          },
          st.value);
    }
  }

  void check_do(const ProtocolDef& def, const DoStmt& d, Span s) {
    const ProtocolDef* target = find(d.protocol);
    if (!target || target->core) {
      error(s, "unknown protocol '" + d.protocol + "'");
      return;
    }
    if (!target->aux && target != &def) {
      error(s, "'" + d.protocol + "' is not an aux protocol");
      return;
    }
    if (d.args.size() != target->roles.size()) {
      error(s, "protocol '" + d.protocol + "' takes " + std::to_string(target->roles.size()) +
                   " roles, " + std::to_string(d.args.size()) + " given");
      return;
    }
    for (std::size_t i = 0; i < d.args.size(); ++i) {
      const auto& a = d.args[i];
      check_role(def, a.role, a.span);
      const auto& decl = target->roles[i];
      if (a.state.size() != decl.state.size())
        error(a.span, "role '" + decl.role.name + "' of '" + d.protocol + "' carries " +
                          std::to_string(decl.state.size()) + " state variables, " +
                          std::to_string(a.state.size()) + " given");
    }
  }

  void run() {
    std::set<std::string> names;
    for (const auto& def : defs) {
      if (!names.insert(def.name).second)
        error(def.span, "duplicate protocol '" + def.name + "'");
      std::set<std::string> roles;
      std::map<std::string, RefinementType> state;
      for (const auto& rd : def.roles) {
        if (!roles.insert(rd.role.name).second)
          error(def.span, "duplicate role '" + rd.role.name + "'");
        for (const auto& sd : rd.state) {
          auto [it, fresh] = state.emplace(sd.var, sd.type);
          if (!fresh && !alpha_equal(it->second, sd.type))
            error(def.span, "state variable '" + sd.var + "' declared with different types");
        }
      }
      if (!def.aux && !def.core)
        for (const auto& rd : def.roles)
          if (!rd.state.empty())
            error(def.span, "state annotations are only allowed on aux protocols");
      std::vector<std::string> recs;
      check_block(def, def.body, recs);
    }
  }
};

}  // namespace

ParseResult parse_protocol(std::string_view text) {
  ParseResult res;
  std::vector<ProtocolDef> defs;
  try {
    Parser p(text);
    defs = p.file();
  } catch (const ParseError& e) {
    res.diagnostics.push_back(e.diagnostic());
    return res;
  } catch (const std::exception& e) {
    res.diagnostics.push_back({Severity::Error, e.what(), Span{}});
    return res;
  }
  const ProtocolDef* main = nullptr;
  for (const auto& d : defs)
    if (!d.aux) {
      main = &d;
      break;
    }
  if (!main) {
    res.diagnostics.push_back({Severity::Error, "no global protocol in input", Span{}});
    return res;
  }
  Checker{defs, res.diagnostics}.run();
  ProtocolDecl decl;
  decl.name = main->name;
  for (const auto& rd : main->roles) decl.roles.push_back(rd.role);
  if (main->core)
    for (const auto& r : participants(*main->core)) decl.roles.push_back(r);
  decl.main = *main;
  for (const auto& d : defs)
    if (d.aux) decl.aux_protocols.push_back(d);
  res.decl = std::move(decl);
  return res;
}

Expr parse_expr(std::string_view text) {
  Parser p(text);
  auto e = p.expr();
  p.expect_eof();
  return e;
}

RefinementType parse_refinement(std::string_view text) {
  Parser p(text);
  auto t = p.refinement();
  p.expect_eof();
  return t;
}

GlobalType parse_global(std::string_view text) {
  Parser p(text);
  auto g = p.global();
  p.expect_eof();
  return g;
}

LocalType parse_local(std::string_view text) {
  Parser p(text);
  auto l = p.local();
  p.expect_eof();
  return l;
}

GlobalContext parse_global_context(std::string_view text) {
  Parser p(text);
  auto c = p.global_context();
  p.expect_eof();
  return c;
}

LocalContext parse_local_context(std::string_view text) {
  Parser p(text);
  auto c = p.local_context();
  p.expect_eof();
  return c;
}

}  // namespace rmpst
