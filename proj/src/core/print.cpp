#include "rmpst/core/print.hpp"

#include <sstream>

namespace rmpst {

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 4;
    case BinaryOp::Mul: return 5;
    default: return 3;
  }
}

class Printer {
 public:
  explicit Printer(bool canonical) : canonical_(canonical) {}

  void expr(std::ostream& os, const Expr& e, int ctx = 0) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, VarExpr>) {
            os << lookup(n.name);
          } else if constexpr (std::is_same_v<T, IntExpr>) {
            if (n.value < 0 && ctx >= 6) os << '(' << n.value << ')';
            else os << n.value;
          } else if constexpr (std::is_same_v<T, BoolExpr>) {
            os << (n.value ? "true" : "false");
          } else if constexpr (std::is_same_v<T, UnaryExpr>) {
            if (ctx > 6) os << '(';
            os << to_string(n.op);
            expr(os, n.arg, 6);
            if (ctx > 6) os << ')';
          } else {
            int p = precedence(n.op);
            bool paren = p < ctx;
            if (paren) os << '(';
            expr(os, n.lhs, p == 3 ? 4 : p);
            os << ' ' << to_string(n.op) << ' ';
            expr(os, n.rhs, p + 1);
            if (paren) os << ')';
          }
        },
        e.node().value);
  }

  // `S{E}` with the binder already in scope.
  void type_body(std::ostream& os, const RefinementType& t) {
    os << to_string(t.base);
    if (!t.predicate.is_true()) {
      os << '{';
      expr(os, t.predicate);
      os << '}';
    }
  }

  void refinement(std::ostream& os, const RefinementType& t) {
    push(t.binder);
    os << lookup(t.binder) << ':';
    type_body(os, t);
    pop();
  }

  // `x:S{E}`; the binder stays in scope for the caller to pop.
  void payload(std::ostream& os, const std::string& var, const RefinementType& t) {
    push(var);
    os << lookup(var) << ':';
    type_body(os, t.with_binder(var));
  }

  void global(std::ostream& os, const GlobalType& g) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, GEnd>) {
            os << "end";
          } else if constexpr (std::is_same_v<T, GMessage>) {
            os << n.from.name << " -> " << n.to.name << " : ";
            bool multi = n.branches.size() > 1;
            if (multi) os << "{ ";
            for (std::size_t i = 0; i < n.branches.size(); ++i) {
              const auto& b = n.branches[i];
              if (i) os << " ; ";
              os << b.label << '(';
              payload(os, b.var, b.type);
              os << ") . ";
              global(os, b.cont);
              pop();
            }
            if (multi) os << " }";
          } else if constexpr (std::is_same_v<T, GRec>) {
            os << "rec ";
            auto names = rec_header(os, n.tvar, n.vars);
            os << " . ";
            tpush(n.tvar, names);
            global(os, n.body);
            tpop();
            for (std::size_t i = 0; i < n.vars.size(); ++i) pop();
          } else {
            tvar(os, n.tvar, n.args);
          }
        },
        g.node().value);
  }

  void local(std::ostream& os, const LocalType& l) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LEnd>) {
            os << "end";
          } else if constexpr (std::is_same_v<T, LComm>) {
            os << n.peer.name << (n.dir == Dir::Send ? " ! " : " ? ");
            bool multi = n.branches.size() > 1;
            if (multi) os << "{ ";
            for (std::size_t i = 0; i < n.branches.size(); ++i) {
              const auto& b = n.branches[i];
              if (i) os << " ; ";
              os << b.label << '(';
              payload(os, b.var, b.type);
              os << ") . ";
              local(os, b.cont);
              pop();
            }
            if (multi) os << " }";
          } else if constexpr (std::is_same_v<T, LSilent>) {
            os << '<' << n.label << ">(";
            payload(os, n.var, n.type);
            os << ") . ";
            local(os, n.cont);
            pop();
          } else if constexpr (std::is_same_v<T, LRec>) {
            os << "rec ";
            auto names = rec_header(os, n.tvar, n.vars);
            os << " . ";
            tpush(n.tvar, names);
            local(os, n.body);
            tpop();
            for (std::size_t i = 0; i < n.vars.size(); ++i) pop();
          } else {
            tvar(os, n.tvar, n.args);
          }
        },
        l.node().value);
  }

  template <class StateVar>
  std::vector<std::string> rec_header(std::ostream& os, const std::string& tvar,
                                      const std::vector<StateVar>& vars) {
    os << tlookup_new(tvar);
    std::vector<std::string> names;
    if (!vars.empty()) {
      os << '(';
      // initialisers are evaluated outside the recursion
      std::vector<std::string> inits;
      for (const auto& v : vars) {
        std::ostringstream s;
        expr(s, v.init);
        inits.push_back(s.str());
      }
      for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (i) os << ", ";
        push(v.var);
        os << lookup(v.var);
        if constexpr (std::is_same_v<StateVar, LStateVar>)
          os << '^' << (v.mult == Mult::Omega ? "w" : "0");
        else if (v.knowers)
          os << "^{" << roles(*v.knowers) << '}';
        os << ':';
        type_body(os, v.type.with_binder(v.var));
        os << " := " << inits[i];
        names.push_back(lookup(v.var));
      }
      os << ')';
    }
    return names;
  }

  void tvar(std::ostream& os, const std::string& name, const std::vector<Expr>& args) {
    const std::vector<std::string>* names = nullptr;
    std::string shown = name;
    for (auto it = tscope_.rbegin(); it != tscope_.rend(); ++it) {
      if (it->source == name) {
        names = &it->vars;
        shown = it->shown;
        break;
      }
    }
    os << shown;
    if (args.empty()) return;
    os << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) os << ", ";
      if (names && i < names->size()) os << (*names)[i] << " := ";
      expr(os, args[i]);
    }
    os << ')';
  }

  static std::string roles(const RoleSet& rs) {
    std::string out;
    for (const auto& r : rs) {
      if (!out.empty()) out += ',';
      out += r.name;
    }
    return out;
  }

 private:
  struct Bound {
    std::string source;
    std::string shown;
  };
  struct TBound {
    std::string source;
    std::string shown;
    std::vector<std::string> vars;
  };

  void push(const std::string& v) {
    scope_.push_back({v, canonical_ ? "%" + std::to_string(counter_++) : v});
  }
  void pop() { scope_.pop_back(); }
  std::string lookup(const std::string& v) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->source == v) return it->shown;
    return v;
  }
  std::string tlookup_new(const std::string& t) {
    pending_tvar_ = canonical_ ? "%t" + std::to_string(tcounter_++) : t;
    return pending_tvar_;
  }
  void tpush(const std::string& t, std::vector<std::string> vars) {
    tscope_.push_back({t, pending_tvar_, std::move(vars)});
  }
  void tpop() { tscope_.pop_back(); }

  bool canonical_;
  int counter_ = 0;
  int tcounter_ = 0;
  std::string pending_tvar_;
  std::vector<Bound> scope_;
  std::vector<TBound> tscope_;
};

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  Printer(false).expr(os, e);
  return os.str();
}

std::string to_string(const RefinementType& t) {
  std::ostringstream os;
  Printer(false).refinement(os, t);
  return os.str();
}

std::string to_string(const GlobalType& g) {
  std::ostringstream os;
  Printer(false).global(os, g);
  return os.str();
}

std::string to_string(const LocalType& l) {
  std::ostringstream os;
  Printer(false).local(os, l);
  return os.str();
}

std::string_view to_string(Mult m) { return m == Mult::Omega ? "w" : "0"; }

std::string to_string(const RoleSet& roles) { return Printer::roles(roles); }

std::string to_string(const GlobalContext& ctx) {
  if (ctx.empty()) return "empty";
  std::ostringstream os;
  Printer p(false);
  bool first = true;
  for (const auto& e : ctx) {
    if (!first) os << ", ";
    first = false;
    os << e.var << "^{" << Printer::roles(e.knowers) << "}:";
    p.type_body(os, e.type.with_binder(e.var));
  }
  return os.str();
}

std::string to_string(const LocalContext& ctx) {
  if (ctx.empty()) return "empty";
  std::ostringstream os;
  Printer p(false);
  bool first = true;
  for (const auto& e : ctx) {
    if (!first) os << ", ";
    first = false;
    os << e.var << '^' << to_string(e.mult) << ':';
    p.type_body(os, e.type.with_binder(e.var));
  }
  return os.str();
}

std::string to_string(const Action& a) {
  std::ostringstream os;
  Printer p(false);
  os << a.from.name << " -> " << a.to.name << " : " << a.label << '(';
  p.payload(os, a.var, a.type);
  os << ')';
  return os.str();
}

std::string canonical_text(const GlobalType& g) {
  std::ostringstream os;
  Printer(true).global(os, g);
  return os.str();
}

std::string canonical_text(const LocalType& l) {
  std::ostringstream os;
  Printer(true).local(os, l);
  return os.str();
}

std::string canonical_text(const RefinementType& t) {
  std::ostringstream os;
  Printer(true).refinement(os, t);
  return os.str();
}

}  // namespace rmpst
