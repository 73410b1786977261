#include "rmpst/refine/validity.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <set>
#include <sstream>

#include "rmpst/core/print.hpp"

namespace rmpst {

Expr Formula::as_expr() const {
  Expr h;
  for (const auto& e : hyps) h = conj(h, e);
  return implies(h, goal);
}

void Formula::declare(const std::string& var, BaseType base) {
  if (base == BaseType::Unit) return;
  for (const auto& [v, b] : decls)
    if (v == var) return;
  decls.emplace_back(var, base);
}

namespace {

template <class Ctx>
Formula encode(const Ctx& ctx) {
  Formula f;
  for (const auto& e : ctx) {
    f.declare(e.var, e.type.base);
    auto p = e.type.with_binder(e.var).predicate;
    if (!p.is_true()) f.hyps.push_back(p);
  }
  return f;
}

}  // namespace

Formula encode_context(const LocalContext& ctx) { return encode(ctx); }
Formula encode_context(const GlobalContext& ctx) { return encode(ctx); }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(const ValidityResult& r) {
  std::string out(to_string(r.verdict));
  if (r.verdict == Verdict::Invalid && !r.model.empty()) {
    out += " (counter-model:";
    for (const auto& [k, v] : r.model) out += " " + k + "=" + to_string(v);
    out += ")";
  }
  if (!r.note.empty()) out += " [" + r.note + "]";
  return out;
}

// ------------------------------------------------------------------ SMT-LIB

namespace {

std::string symbol(const std::string& name) { return "|" + name + "|"; }

void smt(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          os << symbol(n.name);
        } else if constexpr (std::is_same_v<T, IntExpr>) {
          if (n.value < 0) {
            // magnitude of INT64_MIN does not fit in int64
            auto mag = static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(n.value);
            os << "(- " << mag << ")";
          } else {
            os << n.value;
          }
        } else if constexpr (std::is_same_v<T, BoolExpr>) {
          os << (n.value ? "true" : "false");
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          os << (n.op == UnaryOp::Not ? "(not " : "(- ");
          smt(os, n.arg);
          os << ')';
        } else {
          const char* op = "";
          switch (n.op) {
            case BinaryOp::Add: op = "+"; break;
            case BinaryOp::Sub: op = "-"; break;
            case BinaryOp::Mul: op = "*"; break;
            case BinaryOp::Eq: op = "="; break;
            case BinaryOp::Ne: op = "distinct"; break;
            case BinaryOp::Lt: op = "<"; break;
            case BinaryOp::Le: op = "<="; break;
            case BinaryOp::Gt: op = ">"; break;
            case BinaryOp::Ge: op = ">="; break;
            case BinaryOp::And: op = "and"; break;
            case BinaryOp::Or: op = "or"; break;
          }
          os << '(' << op << ' ';
          smt(os, n.lhs);
          os << ' ';
          smt(os, n.rhs);
          os << ')';
        }
      },
      e.node().value);
}

bool is_constant(const Expr& e) { return free_vars(e).empty(); }

bool nonlinear(const Expr& e) {
  if (auto b = e.as<BinaryExpr>()) {
    if (b->op == BinaryOp::Mul && !is_constant(b->lhs) && !is_constant(b->rhs)) return true;
    return nonlinear(b->lhs) || nonlinear(b->rhs);
  }
  if (auto u = e.as<UnaryExpr>()) return nonlinear(u->arg);
  return false;
}

}  // namespace

std::string to_smtlib(const Formula& f) {
  bool strings = false;
  for (const auto& [v, b] : f.decls) strings = strings || b == BaseType::String;
  bool nl = nonlinear(f.goal);
  for (const auto& h : f.hyps) nl = nl || nonlinear(h);
  const char* logic = strings ? (nl ? "ALL" : "QF_SLIA") : (nl ? "QF_NIA" : "QF_LIA");

  std::ostringstream os;
  os << "(set-option :produce-models true)\n(set-logic " << logic << ")\n";
  for (const auto& [v, b] : f.decls) {
    const char* sort = b == BaseType::Int ? "Int" : b == BaseType::Bool ? "Bool" : "String";
    os << "(declare-const " << symbol(v) << ' ' << sort << ")\n";
  }
  for (const auto& h : f.hyps) {
    os << "(assert ";
    smt(os, h);
    os << ")\n";
  }
  os << "(assert (not ";
  smt(os, f.goal);
  os << "))\n(check-sat)\n";
  if (!f.decls.empty()) {
    os << "(get-value (";
    for (std::size_t i = 0; i < f.decls.size(); ++i) os << (i ? " " : "") << symbol(f.decls[i].first);
    os << "))\n";
  }
  return os.str();
}

SolverConfig SolverConfig::from_env() {
  SolverConfig c;
  if (const char* p = std::getenv("RMPST_SOLVER"); p && *p) c.path = p;
  return c;
}

// ----------------------------------------------------------- solver process

namespace {

struct ProcessOutput {
  std::string out;
  bool timed_out = false;
  int status = 0;
};

ProcessOutput run_process(const std::string& path, const std::vector<std::string>& args,
                          const std::string& input, int timeout_ms) {
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in[2], out[2], err[2];
  if (::pipe2(in, O_CLOEXEC) || ::pipe2(out, O_CLOEXEC) || ::pipe2(err, O_CLOEXEC))
    throw SolverUnavailable(std::string("pipe: ") + std::strerror(errno));

  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(path.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) throw SolverUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in[0], 0);
    ::dup2(out[1], 1);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    ::execvp(path.c_str(), argv.data());
    int e = errno;
    (void)!::write(err[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);

  int exec_errno = 0;
  if (::read(err[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::close(err[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::waitpid(pid, nullptr, 0);
    throw SolverUnavailable("cannot run solver '" + path + "': " + std::strerror(exec_errno));
  }
  ::close(err[0]);

  std::size_t written = 0;
  while (written < input.size()) {
    auto n = ::write(in[1], input.data() + written, input.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  ::close(in[1]);

  ProcessOutput res;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms + 1000);
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count();
    if (left <= 0) {
      res.timed_out = true;
      ::kill(pid, SIGKILL);
      break;
    }
    pollfd p{out[0], POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) continue;
    auto n = ::read(out[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    res.out.append(buf, static_cast<std::size_t>(n));
  }
  ::close(out[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  res.status = status;
  return res;
}

// Minimal s-expression reader for get-value output.
struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SReader {
 public:
  explicit SReader(std::string_view s) : s_(s) {}

  bool read(SExpr& out) {
    skip();
    if (i_ >= s_.size()) return false;
    if (s_[i_] == '(') {
      ++i_;
      out.is_list = true;
      for (;;) {
        skip();
        if (i_ >= s_.size()) return false;
        if (s_[i_] == ')') {
          ++i_;
          return true;
        }
        SExpr child;
        if (!read(child)) return false;
        out.list.push_back(std::move(child));
      }
    }
    if (s_[i_] == ')') return false;
    if (s_[i_] == '|') {
      auto end = s_.find('|', i_ + 1);
      if (end == std::string_view::npos) return false;
      out.atom = std::string(s_.substr(i_ + 1, end - i_ - 1));
      i_ = end + 1;
      return true;
    }
    if (s_[i_] == '"') {
      std::string v = "\"";
      ++i_;
      while (i_ < s_.size()) {
        if (s_[i_] == '"') {
          if (i_ + 1 < s_.size() && s_[i_ + 1] == '"') {
            v += '"';
            i_ += 2;
            continue;
          }
          ++i_;
          break;
        }
        v += s_[i_++];
      }
      out.atom = v;
      return true;
    }
    auto start = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' &&
           s_[i_] != ')')
      ++i_;
    out.atom = std::string(s_.substr(start, i_ - start));
    return true;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string_view s_;
  std::size_t i_ = 0;
};

std::optional<Value> model_value(const SExpr& e, BaseType base) {
  if (!e.is_list) {
    if (base == BaseType::Bool) {
      if (e.atom == "true") return Value{true};
      if (e.atom == "false") return Value{false};
      return std::nullopt;
    }
    if (base == BaseType::String) {
      if (!e.atom.empty() && e.atom[0] == '"') return Value{e.atom.substr(1)};
      return std::nullopt;
    }
    try {
      return Value{static_cast<std::int64_t>(std::stoll(e.atom))};
    } catch (...) {
      return std::nullopt;
    }
  }
  if (base == BaseType::Int && e.list.size() == 2 && e.list[0].atom == "-") {
    auto v = model_value(e.list[1], base);
    if (v) return Value{-std::get<std::int64_t>(*v)};
  }
  return std::nullopt;
}

}  // namespace

ValidityResult check_validity_solver(const Formula& f, const SolverConfig& cfg) {
  auto text = to_smtlib(f);
  auto out = run_process(cfg.path, {"-in", "-smt2", "-t:" + std::to_string(cfg.timeout_ms)}, text,
                         cfg.timeout_ms);
  ValidityResult r;
  if (out.timed_out) {
    r.note = "solver timed out";
    return r;
  }
  std::istringstream is(out.out);
  std::string first;
  is >> first;
  if (first == "unsat") {
    r.verdict = Verdict::Valid;
    return r;
  }
  if (first == "sat") {
    r.verdict = Verdict::Invalid;
    std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    SReader rd(rest);
    SExpr e;
    if (rd.read(e) && e.is_list) {
      for (const auto& pair : e.list) {
        if (!pair.is_list || pair.list.size() != 2) continue;
        const auto& name = pair.list[0].atom;
        for (const auto& [v, b] : f.decls)
          if (v == name)
            if (auto val = model_value(pair.list[1], b)) r.model[v] = *val;
      }
    }
    return r;
  }
  r.note = first.empty() ? "no answer from solver" : "solver said '" + first + "'";
  return r;
}

// -------------------------------------------------------------- enumeration

namespace {

enum class Op : std::uint8_t {
  Const, Load, Neg, Not, Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or
};

struct Instr {
  Op op;
  std::int64_t arg;
};

struct Program {
  std::vector<Instr> code;
  int max_slot = -1;
};

struct CompileError {};

void compile(const Expr& e, const std::map<std::string, int>& slots, Program& p) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          auto it = slots.find(n.name);
          if (it == slots.end()) throw CompileError{};
          p.code.push_back({Op::Load, it->second});
          p.max_slot = std::max(p.max_slot, it->second);
        } else if constexpr (std::is_same_v<T, IntExpr>) {
          p.code.push_back({Op::Const, n.value});
        } else if constexpr (std::is_same_v<T, BoolExpr>) {
          p.code.push_back({Op::Const, n.value ? 1 : 0});
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          compile(n.arg, slots, p);
          p.code.push_back({n.op == UnaryOp::Not ? Op::Not : Op::Neg, 0});
        } else {
          compile(n.lhs, slots, p);
          compile(n.rhs, slots, p);
          static const Op map[] = {Op::Add, Op::Sub, Op::Mul, Op::Eq, Op::Ne, Op::Lt,
                                   Op::Le,  Op::Gt,  Op::Ge,  Op::And, Op::Or};
          p.code.push_back({map[static_cast<int>(n.op)], 0});
        }
      },
      e.node().value);
}

std::int64_t run(const Program& p, const std::int64_t* slots) {
  std::int64_t stack[64] = {};
  std::vector<std::int64_t> big;
  std::int64_t* st = stack;
  if (p.code.size() > 64) {
    big.resize(p.code.size());
    st = big.data();
  }
  int sp = 0;
  for (const auto& in : p.code) {
    switch (in.op) {
      case Op::Const: st[sp++] = in.arg; break;
      case Op::Load: st[sp++] = slots[in.arg]; break;
      case Op::Neg: st[sp - 1] = static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(st[sp - 1])); break;
      case Op::Not: st[sp - 1] = !st[sp - 1]; break;
      default: {
        auto b = st[--sp];
        auto a = st[sp - 1];
        auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
        std::int64_t r = 0;
        switch (in.op) {
          case Op::Add: r = static_cast<std::int64_t>(ua + ub); break;
          case Op::Sub: r = static_cast<std::int64_t>(ua - ub); break;
          case Op::Mul: r = static_cast<std::int64_t>(ua * ub); break;
          case Op::Eq: r = a == b; break;
          case Op::Ne: r = a != b; break;
          case Op::Lt: r = a < b; break;
          case Op::Le: r = a <= b; break;
          case Op::Gt: r = a > b; break;
          case Op::Ge: r = a >= b; break;
          case Op::And: r = a && b; break;
          case Op::Or: r = a || b; break;
          default: break;
        }
        st[sp - 1] = r;
      }
    }
  }
  return st[0];
}

void flatten_and(const Expr& e, std::vector<Expr>& out) {
  if (auto b = e.as<BinaryExpr>(); b && b->op == BinaryOp::And) {
    flatten_and(b->lhs, out);
    flatten_and(b->rhs, out);
  } else if (!e.is_true()) {
    out.push_back(e);
  }
}

struct Search {
  int bound = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t steps = 0;
  std::vector<BaseType> sorts;
  int string_vars = 0;
  // constraints checked once every slot up to the level is assigned
  std::vector<std::vector<Program>> at_level;
  // per level: optional program computing the slot directly (v = E)
  std::vector<std::vector<Program>> defining;
  std::vector<std::int64_t> slots;
  bool exhausted = false;

  bool holds(const std::vector<Program>& ps) {
    for (const auto& p : ps) {
      ++steps;
      if (!run(p, slots.data())) return false;
    }
    return true;
  }

  bool assign(std::size_t level) {
    if (level == sorts.size()) return true;
    if (steps > max_steps) {
      exhausted = true;
      return false;
    }
    auto try_value = [&](std::int64_t v) {
      slots[level] = v;
      return holds(at_level[level + 1]) && assign(level + 1);
    };
    if (!defining[level].empty()) {
      ++steps;
      auto v = run(defining[level].front(), slots.data());
      if (sorts[level] == BaseType::Int && (v < -bound || v > bound)) return false;
      if (sorts[level] == BaseType::Bool && v != 0 && v != 1) return false;
      return try_value(v);
    }
    switch (sorts[level]) {
      case BaseType::Bool:
        return try_value(0) || try_value(1);
      case BaseType::String:
        for (int s = 0; s < string_vars; ++s)
          if (try_value(s)) return true;
        return false;
      default:
        for (std::int64_t v = 0;; v = v > 0 ? -v : -v + 1) {
          if (v > bound) return false;
          if (try_value(v)) return true;
          if (exhausted) return false;
        }
    }
  }
};

}  // namespace

ValidityResult check_validity_enumerate(const Formula& f, int bound, std::uint64_t max_steps) {
  ValidityResult r;
  std::map<std::string, int> slot_of;
  Search s;
  s.bound = bound;
  s.max_steps = max_steps;
  for (const auto& [v, b] : f.decls) {
    slot_of[v] = static_cast<int>(s.sorts.size());
    s.sorts.push_back(b);
    if (b == BaseType::String) ++s.string_vars;
  }
  std::size_t n = s.sorts.size();
  s.slots.assign(n, 0);
  // at_level[k] holds constraints whose last slot is k-1
  s.at_level.assign(n + 1, {});
  s.defining.assign(n, {});

  std::vector<Expr> conjuncts;
  for (const auto& h : f.hyps) flatten_and(h, conjuncts);
  conjuncts.push_back(negate(f.goal));

  try {
    for (const auto& c : conjuncts) {
      Program p;
      compile(c, slot_of, p);
      int level = p.max_slot + 1;
      // `v = E` with E over earlier slots defines v directly
      if (auto b = c.as<BinaryExpr>(); b && b->op == BinaryOp::Eq && level > 0) {
        for (int side = 0; side < 2; ++side) {
          const Expr& lhs = side ? b->rhs : b->lhs;
          const Expr& rhs = side ? b->lhs : b->rhs;
          auto v = lhs.as<VarExpr>();
          if (!v || slot_of.at(v->name) != level - 1) continue;
          Program q;
          compile(rhs, slot_of, q);
          if (q.max_slot < level - 1 && s.defining[level - 1].empty()) {
            s.defining[level - 1].push_back(q);
            break;
          }
        }
      }
      s.at_level[level].push_back(std::move(p));
    }
  } catch (const CompileError&) {
    r.note = "formula mentions an undeclared variable";
    return r;
  }

  if (!s.holds(s.at_level[0])) {
    r.verdict = Verdict::Valid;
    return r;
  }
  bool found = s.assign(0);
  if (found) {
    r.verdict = Verdict::Invalid;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& name = f.decls[i].first;
      switch (s.sorts[i]) {
        case BaseType::Int: r.model[name] = s.slots[i]; break;
        case BaseType::Bool: r.model[name] = s.slots[i] != 0; break;
        default: r.model[name] = "s" + std::to_string(s.slots[i]); break;
      }
    }
    return r;
  }
  if (s.exhausted) {
    r.note = "enumeration budget exceeded";
    return r;
  }
  r.verdict = Verdict::Valid;
  r.note = "within bound " + std::to_string(bound);
  return r;
}

// ------------------------------------------------------------------ oracle

Oracle::Oracle(Mode m, SolverConfig cfg, int bound)
    : mode_(m), cfg_(std::move(cfg)), bound_(bound), cache_(std::make_shared<Cache>()) {}

Oracle Oracle::solver(SolverConfig cfg) { return Oracle(Mode::Solver, std::move(cfg), 0); }
Oracle Oracle::enumerate(int bound) { return Oracle(Mode::Enumerate, SolverConfig{}, bound); }

ValidityResult Oracle::check(const Formula& f) const {
  auto key = to_smtlib(f);
  {
    std::lock_guard<std::mutex> lk(cache_->mu);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
  }
  auto r = mode_ == Mode::Solver ? check_validity_solver(f, cfg_)
                                 : check_validity_enumerate(f, bound_);
  std::lock_guard<std::mutex> lk(cache_->mu);
  cache_->entries.emplace(key, r);
  return r;
}

std::size_t Oracle::cache_size() const {
  std::lock_guard<std::mutex> lk(cache_->mu);
  return cache_->entries.size();
}

}  // namespace rmpst
