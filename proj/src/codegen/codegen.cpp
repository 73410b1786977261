#include "rmpst/codegen/codegen.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"

namespace rmpst {

namespace {

const std::set<std::string> kKeywords = {
    "alignas", "alignof", "and", "asm", "auto", "bool", "break", "case", "catch", "char", "class",
    "const", "constexpr", "continue", "default", "delete", "do", "double", "else", "enum", "explicit",
    "export", "extern", "false", "float", "for", "friend", "goto", "if", "inline", "int", "long",
    "mutable", "namespace", "new", "noexcept", "not", "operator", "or", "private", "protected",
    "public", "register", "return", "short", "signed", "sizeof", "static", "struct", "switch",
    "template", "this", "throw", "true", "try", "typedef", "typename", "union", "unsigned", "using",
    "virtual", "void", "volatile", "while", "xor", "label", "payload", "st", "r", "q", "cb", "conn"};

std::string cpp_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string cpp_type(BaseType b) {
  switch (b) {
    case BaseType::Int: return "std::int64_t";
    case BaseType::Bool: return "bool";
    case BaseType::String: return "std::string";
    case BaseType::Unit: return "rmpst::Unit";
  }
  return "void";
}

std::string cpp_sort(BaseType b) {
  switch (b) {
    case BaseType::Int: return "rmpst::BaseType::Int";
    case BaseType::Bool: return "rmpst::BaseType::Bool";
    case BaseType::String: return "rmpst::BaseType::String";
    case BaseType::Unit: return "rmpst::BaseType::Unit";
  }
  return "";
}

using Names = std::map<std::string, std::string>;  // protocol var -> C++ expression

std::string emit(const Expr& e, const Names& names) {
  if (auto v = e.as<VarExpr>()) return names.at(v->name);
  if (auto i = e.as<IntExpr>()) {
    if (i->value == INT64_MIN) return "INT64_MIN";
    return "std::int64_t{" + std::to_string(i->value) + "}";
  }
  if (auto b = e.as<BoolExpr>()) return b->value ? "true" : "false";
  if (auto u = e.as<UnaryExpr>()) {
    if (u->op == UnaryOp::Not) return "!(" + emit(u->arg, names) + ")";
    return "sub(0, " + emit(u->arg, names) + ")";
  }
  const auto& b = *e.as<BinaryExpr>();
  auto l = emit(b.lhs, names), r = emit(b.rhs, names);
  switch (b.op) {
    case BinaryOp::Add: return "add(" + l + ", " + r + ")";
    case BinaryOp::Sub: return "sub(" + l + ", " + r + ")";
    case BinaryOp::Mul: return "mul(" + l + ", " + r + ")";
    case BinaryOp::Eq: return "(" + l + " == " + r + ")";
    case BinaryOp::Ne: return "(" + l + " != " + r + ")";
    case BinaryOp::Lt: return "(" + l + " < " + r + ")";
    case BinaryOp::Le: return "(" + l + " <= " + r + ")";
    case BinaryOp::Gt: return "(" + l + " > " + r + ")";
    case BinaryOp::Ge: return "(" + l + " >= " + r + ")";
    case BinaryOp::And: return "(" + l + " && " + r + ")";
    case BinaryOp::Or: return "(" + l + " || " + r + ")";
  }
  return "";
}

bool covered(const Expr& e, const Names& names) {
  for (const auto& v : free_vars(e))
    if (!names.count(v)) return false;
  return true;
}

class Generator {
 public:
  Generator(const Cfsm& m, std::string protocol) : m_(m), protocol_(std::move(protocol)) {}

  std::string run() {
    collect_fields();
    header();
    for (const auto& s : m_.states) state_struct(s);
    callbacks();
    record();
    run_function();
    out_ << "}  // namespace " << ns_ << "\n";
    return out_.str();
  }

 private:
  void collect_fields() {
    auto note = [&](const std::string& var, BaseType b) {
      if (b == BaseType::Unit) return;
      auto [it, fresh] = fields_.emplace(var, b);
      if (!fresh && it->second != b)
        throw GenerationError("variable '" + var + "' is used at two sorts");
      if (fresh) order_.push_back(var);
    };
    for (const auto& s : m_.states)
      for (const auto& e : s.context)
        if (e.mult == Mult::Omega) note(e.var, e.type.base);
    for (const auto& t : m_.transitions) note(t.var, t.type.base);
    std::set<std::string> used;
    for (const auto& v : order_) {
      auto id = cpp_identifier(v);
      if (kKeywords.count(id)) id += "_";
      while (!used.insert(id).second) id += "_";
      ident_[v] = id;
    }
  }

  std::vector<const LocalEntry*> visible(const CfsmState& s) const {
    std::vector<const LocalEntry*> out;
    for (const auto& e : s.context)
      if (e.mult == Mult::Omega && e.type.base != BaseType::Unit) out.push_back(&e);
    return out;
  }

  std::string sname(int q) const { return "State" + std::to_string(q); }
  std::string variant(int q, const std::string& label) const { return sname(q) + "_" + cpp_identifier(label); }

  void header() {
    ns_ = "rmpst_gen::" + cpp_identifier(protocol_) + "_" + cpp_identifier(m_.role.name);
    out_ << "// Generated by rmpst from protocol " << protocol_ << ", role " << m_.role.name
         << ". Do not edit.\n"
         << "#pragma once\n\n"
         << "#include <cstdint>\n#include <optional>\n#include <string>\n#include <variant>\n\n"
         << "#include \"rmpst/runtime/connection.hpp\"\n\n"
         << "namespace " << ns_ << " {\n\n"
         << "using Connection = rmpst::rt::Connection;\n\n"
         << "namespace detail {\n"
         << "inline std::int64_t add(std::int64_t a, std::int64_t b) {\n"
         << "  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));\n}\n"
         << "inline std::int64_t sub(std::int64_t a, std::int64_t b) {\n"
         << "  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));\n}\n"
         << "inline std::int64_t mul(std::int64_t a, std::int64_t b) {\n"
         << "  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));\n}\n"
         << "}  // namespace detail\n\n";
  }

  void state_struct(const CfsmState& s) {
    std::vector<std::string> erased;
    for (const auto& e : s.context)
      if (e.mult == Mult::Zero) erased.push_back(e.var);
    out_ << "// state " << s.id << " (" << to_string(s.kind) << ")";
    if (!erased.empty()) {
      out_ << ", erased:";
      for (const auto& v : erased) out_ << " " << v;
    }
    out_ << "\nstruct " << sname(s.id) << " {\n";
    for (const auto* e : visible(s))
      out_ << "  " << cpp_type(e->type.base) << " " << ident_.at(e->var) << ";  // "
           << to_string(e->type.with_binder(e->var)) << "\n";
    out_ << "};\n\n";
    if (s.kind != StateKind::Send) return;
    std::string alts;
    for (const auto* t : m_.outgoing(s.id)) {
      out_ << "struct " << variant(s.id, t->label) << " {";
      if (t->type.base != BaseType::Unit)
        out_ << "\n  " << cpp_type(t->type.base) << " " << ident_.at(t->var) << ";  // "
             << to_string(t->type.with_binder(t->var)) << "\n";
      out_ << "};\n";
      alts += (alts.empty() ? "" : ", ") + variant(s.id, t->label);
    }
    out_ << "using " << sname(s.id) << "Choice = std::variant<" << alts << ">;\n\n";
  }

  void callbacks() {
    out_ << "// one chooser per sending state, one handler per received label\n"
         << "class Callbacks {\n public:\n  virtual ~Callbacks() = default;\n";
    for (const auto& s : m_.states) {
      if (s.kind == StateKind::Send) {
        out_ << "  virtual " << sname(s.id) << "Choice state" << s.id << "_send(const " << sname(s.id)
             << "& st) = 0;\n";
      } else if (s.kind == StateKind::Recv) {
        for (const auto* t : m_.outgoing(s.id)) {
          out_ << "  virtual void state" << s.id << "_receive_" << cpp_identifier(t->label) << "(const "
               << sname(s.id) << "& st";
          if (t->type.base != BaseType::Unit)
            out_ << ", " << cpp_type(t->type.base) << " " << ident_.at(t->var);
          out_ << ") = 0;\n";
        }
      }
    }
    out_ << "};\n\n";
  }

  void record() {
    out_ << "struct Record {\n";
    for (const auto& v : order_)
      out_ << "  std::optional<" << cpp_type(fields_.at(v)) << "> " << ident_.at(v) << ";\n";
    out_ << "};\n\n"
         << "inline std::string snapshot(const Record& r) {\n"
         << "  std::string out;\n";
    for (const auto& v : order_) {
      std::string id = "r." + ident_.at(v);
      std::string show;
      switch (fields_.at(v)) {
        case BaseType::Int: show = "std::to_string(*" + id + ")"; break;
        case BaseType::Bool: show = "std::string(*" + id + " ? \"true\" : \"false\")"; break;
        default: show = "\"\\\"\" + *" + id + " + \"\\\"\""; break;
      }
      out_ << "  if (" << id << ") out += (out.empty() ? \"\" : \", \") + std::string(" << cpp_string(v)
           << ") + \" = \" + " << show << ";\n";
    }
    out_ << "  return \"{\" + out + \"}\";\n}\n\n"
         << "inline void require(bool ok, int state, const char* what, const char* pred, const Record& r) {\n"
         << "  if (!ok)\n"
         << "    throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::RefinementFailed,\n"
         << "                                      std::string(\"state \") + std::to_string(state) + \" \" + what + \": \" + pred +\n"
         << "                                          \" does not hold in \" + snapshot(r),\n"
         << "                                      state, pred, snapshot(r));\n}\n\n";
  }

  Names names_at(const CfsmState& s) const {
    Names n;
    for (const auto* e : visible(s)) n[e->var] = "(*r." + ident_.at(e->var) + ")";
    return n;
  }

  std::string view(const CfsmState& s) const {
    std::string init;
    for (const auto* e : visible(s)) init += (init.empty() ? "" : ", ") + ("*r." + ident_.at(e->var));
    return "const " + sname(s.id) + " st{" + init + "};";
  }

  void updates(const std::vector<Update>& ups, const Names& names, const std::string& pad) {
    std::vector<std::pair<std::string, std::string>> assigns;
    int k = 0;
    for (const auto& u : ups) {
      if (!fields_.count(u.var)) continue;
      if (!covered(u.expr, names)) {
        assigns.emplace_back(ident_.at(u.var), "");
        continue;
      }
      std::string tmp = "u" + std::to_string(k++);
      out_ << pad << "const " << cpp_type(fields_.at(u.var)) << " " << tmp << " = " << emit(u.expr, names)
           << ";  // " << u.var << " := " << to_string(u.expr) << "\n";
      assigns.emplace_back(ident_.at(u.var), tmp);
    }
    for (const auto& [id, tmp] : assigns) {
      if (tmp.empty()) out_ << pad << "r." << id << ".reset();\n";
      else out_ << pad << "r." << id << " = " << tmp << ";\n";
    }
  }

  void assertion(const CfsmState& s, const Transition& t, const Names& names, const std::string& pad) {
    auto pred = t.type.with_binder(t.var).predicate;
    if (pred.is_true()) return;
    std::string what = std::string(t.dir == Dir::Send ? "send " : "receive ") + t.label;
    if (!covered(pred, names)) {
      out_ << pad << "// not checked, mentions erased variables: " << to_string(pred) << "\n";
      return;
    }
    out_ << pad << "require(" << emit(pred, names) << ", " << s.id << ", " << cpp_string(what) << ", "
         << cpp_string(to_string(pred)) << ", r);\n";
  }

  void run_function() {
    out_ << "inline Record run(Callbacks& cb, Connection& conn) {\n"
         << "  using namespace detail;\n"
         << "  Record r;\n";
    Names init;
    for (const auto* e : visible(m_.state(m_.initial))) init[e->var] = "(*r." + ident_.at(e->var) + ")";
    // initial updates only see what the initial context makes concrete
    updates(m_.initial_updates, init, "  ");
    out_ << "  int q = " << m_.initial << ";\n"
         << "  for (;;) {\n"
         << "    switch (q) {\n";
    for (const auto& s : m_.states) {
      out_ << "      case " << s.id << ": {\n";
      if (s.kind == StateKind::Terminal) {
        out_ << "        return r;\n      }\n";
        continue;
      }
      auto edges = m_.outgoing(s.id);
      std::string peer = "rmpst::Role{" + cpp_string(edges.front()->peer.name) + "}";
      out_ << "        " << view(s) << "\n";
      if (s.kind == StateKind::Send) {
        out_ << "        const auto c = cb.state" << s.id << "_send(st);\n";
        bool first = true;
        for (const auto* t : edges) {
          out_ << "        " << (first ? "" : "} else ") << "if (auto* p = std::get_if<" << variant(s.id, t->label)
               << ">(&c)) {\n";
          first = false;
          auto names = names_at(s);
          std::string value = "rmpst::Unit{}";
          if (t->type.base != BaseType::Unit) {
            names[t->var] = "p->" + ident_.at(t->var);
            value = "p->" + ident_.at(t->var);
          } else {
            out_ << "          (void)p;\n";
          }
          assertion(s, *t, names, "          ");
          out_ << "          conn.send_message(" << peer << ", " << cpp_string(t->label) << ", rmpst::Value(" << value
               << "));\n";
          transition_tail(s, *t);
        }
        out_ << "        }\n        break;\n      }\n";
      } else {
        out_ << "        const std::string label = conn.recv_label(" << peer << ");\n";
        bool first = true;
        for (const auto* t : edges) {
          out_ << "        " << (first ? "" : "} else ") << "if (label == " << cpp_string(t->label) << ") {\n";
          first = false;
          auto names = names_at(s);
          std::string args = "st";
          if (t->type.base != BaseType::Unit) {
            std::string id = ident_.at(t->var);
            out_ << "          const auto " << id << " = std::get<" << cpp_type(t->type.base) << ">(conn.recv_payload("
                 << peer << ", label, " << cpp_sort(t->type.base) << "));\n";
            names[t->var] = id;
            args += ", " + id;
          } else {
            out_ << "          conn.recv_payload(" << peer << ", label, rmpst::BaseType::Unit);\n";
          }
          assertion(s, *t, names, "          ");
          out_ << "          cb.state" << s.id << "_receive_" << cpp_identifier(t->label) << "(" << args << ");\n";
          transition_tail(s, *t);
        }
        out_ << "        } else {\n"
             << "          throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::UnknownLabel,\n"
             << "                                            \"state " << s.id << " got '\" + label + \"'\", " << s.id
             << ");\n"
             << "        }\n        break;\n      }\n";
      }
    }
    out_ << "    }\n  }\n}\n\n";
  }

  void transition_tail(const CfsmState& s, const Transition& t) {
    auto names = names_at(s);
    if (t.type.base != BaseType::Unit) {
      std::string id = ident_.at(t.var);
      out_ << "          r." << id << " = " << (t.dir == Dir::Send ? "p->" + id : id) << ";\n";
      names[t.var] = "(*r." + id + ")";
    }
    updates(t.updates, names, "          ");
    out_ << "          q = " << t.to << ";\n";
  }

  const Cfsm& m_;
  std::string protocol_;
  std::string ns_;
  std::map<std::string, BaseType> fields_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> ident_;
  std::ostringstream out_;
};

}  // namespace

std::string cpp_identifier(std::string_view name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "_" + out;
  return out;
}

std::vector<GeneratedFile> generate(const Cfsm& m, const std::string& protocol) {
  auto problems = validate(m);
  if (!problems.empty())
    throw GenerationError("machine for " + m.role.name + " is invalid: state " +
                          std::to_string(problems.front().state) + ": " + problems.front().message);
  return {GeneratedFile{cpp_identifier(protocol) + "_" + cpp_identifier(m.role.name) + ".hpp",
                        Generator(m, protocol).run()}};
}

ChooserSpec parse_chooser(std::string_view text) {
  ChooserSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto fail = [&](const std::string& why) {
      throw GenerationError("chooser line " + std::to_string(lineno) + ": " + why);
    };
    std::size_t i = 0;
    auto skip = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip();
    if (i == line.size()) continue;
    std::size_t j = i;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
    if (j == i) fail("expected a state number");
    int state = std::stoi(line.substr(i, j - i));
    i = j;
    skip();
    j = i;
    while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
    if (j == i) fail("expected a label");
    rt::Decision d{line.substr(i, j - i), Expr::boolean(true)};
    i = j;
    if (i < line.size() && line[i] == '(') {
      int depth = 0;
      j = i;
      for (; j < line.size(); ++j) {
        if (line[j] == '(') ++depth;
        if (line[j] == ')' && --depth == 0) break;
      }
      if (j == line.size()) fail("unbalanced payload parentheses");
      try {
        d.payload = parse_expr(line.substr(i + 1, j - i - 1));
      } catch (const std::exception& e) {
        fail(e.what());
      }
      i = j + 1;
    }
    skip();
    auto rest = line.substr(i);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
    if (rest == "otherwise") {
      d.guard = Expr::boolean(true);
    } else if (rest.rfind("when", 0) == 0 && rest.size() > 4 && std::isspace(static_cast<unsigned char>(rest[4]))) {
      try {
        d.guard = parse_expr(rest.substr(5));
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else {
      fail("expected 'when <guard>' or 'otherwise'");
    }
    spec[state].push_back(std::move(d));
  }
  return spec;
}

std::map<int, ChooserReport> check_choosers(const Cfsm& m, const ChooserSpec& spec, const Oracle& oracle) {
  std::map<int, ChooserReport> out;
  for (const auto& [q, list] : spec) {
    if (q < 1 || q > static_cast<int>(m.states.size()) || m.state(q).kind != StateKind::Send)
      throw GenerationError("state " + std::to_string(q) + " of " + m.role.name + " is not a sending state");
    std::vector<LBranch> branches;
    for (const auto* t : m.outgoing(q)) branches.push_back(LBranch{t->label, t->var, t->type, LocalType::end()});
    std::vector<GuardedLabel> guards;
    for (const auto& d : list) guards.push_back(GuardedLabel{d.label, d.guard});
    out.emplace(q, check_chooser(m.state(q).context, branches, guards, oracle));
  }
  return out;
}

}  // namespace rmpst
