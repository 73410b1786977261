#include "rmpst/project/project.hpp"

#include "rmpst/core/print.hpp"
#include "rmpst/refine/typing.hpp"

namespace rmpst {

std::string_view to_string(MergeMode m) {
  switch (m) {
    case MergeMode::Plain: return "plain";
    case MergeMode::Full: return "full";
    case MergeMode::Auto: return "auto";
  }
  return "?";
}

std::string_view to_string(ProjectionErrorKind k) {
  switch (k) {
    case ProjectionErrorKind::MergeFailure: return "MergeFailure";
    case ProjectionErrorKind::ExprTypeFailure: return "ExprTypeFailure";
    case ProjectionErrorKind::IrrelevantVariableUse: return "IrrelevantVariableUse";
    case ProjectionErrorKind::FreeTypeVar: return "FreeTypeVar";
    case ProjectionErrorKind::NonContractive: return "NonContractive";
  }
  return "?";
}

LocalContext project_ctx(const GlobalContext& ctx, const Role& p) {
  std::vector<LocalEntry> out;
  for (const auto& e : ctx)
    out.push_back(LocalEntry{e.var, e.knowers.count(p) ? Mult::Omega : Mult::Zero, e.type});
  return LocalContext(std::move(out));
}

RoleSet state_knowers(const GRec& rec, const GStateVar& v) {
  return v.knowers ? *v.knowers : participants(rec.body);
}

namespace {

std::string shorten(const std::string& s) {
  return s.size() <= 120 ? s : s.substr(0, 117) + "...";
}

class Merger {
 public:
  explicit Merger(MergeMode mode) : mode_(mode) {}

  LocalType run(const LocalType& a, const LocalType& b) {
    if (alpha_equal(a, b)) return a;
    if (mode_ == MergeMode::Plain) fail(a, b);
    return full(a, b);
  }

 private:
  [[noreturn]] void fail(const LocalType& a, const LocalType& b) {
    throw ProjectionError(ProjectionErrorKind::MergeFailure, "",
                          "cannot merge '" + shorten(to_string(a)) + "' with '" +
                              shorten(to_string(b)) + "'");
  }

  LocalType full(const LocalType& a, const LocalType& b) {
    auto sa = a.as<LSilent>();
    auto sb = b.as<LSilent>();
    if (sa && sb && sa->label == sb->label && sa->var == sb->var && alpha_equal(sa->type, sb->type))
      return LocalType::silent(sa->label, sa->var, sa->type, run(sa->cont, sb->cont));
    if (sa && !free_vars(sa->cont).count(sa->var)) return run(sa->cont, b);
    if (sb && !free_vars(sb->cont).count(sb->var)) return run(a, sb->cont);

    auto ca = a.as<LComm>();
    auto cb = b.as<LComm>();
    if (ca && cb && ca->dir == cb->dir && ca->peer == cb->peer) {
      auto find = [](const LComm& c, const std::string& l) -> const LBranch* {
        for (const auto& br : c.branches)
          if (br.label == l) return &br;
        return nullptr;
      };
      if (ca->dir == Dir::Send && ca->branches.size() != cb->branches.size()) fail(a, b);
      std::vector<LBranch> out;
      for (const auto& x : ca->branches) {
        auto y = find(*cb, x.label);
        if (!y) {
          if (ca->dir == Dir::Send) fail(a, b);
          out.push_back(x);
          continue;
        }
        if (x.var != y->var || !alpha_equal(x.type, y->type)) fail(a, b);
        out.push_back(LBranch{x.label, x.var, x.type, run(x.cont, y->cont)});
      }
      for (const auto& y : cb->branches)
        if (!find(*ca, y.label)) out.push_back(y);
      return LocalType::comm(ca->dir, ca->peer, std::move(out));
    }

    auto ra = a.as<LRec>();
    auto rb = b.as<LRec>();
    if (ra && rb && ra->tvar == rb->tvar && ra->vars.size() == rb->vars.size()) {
      for (std::size_t i = 0; i < ra->vars.size(); ++i) {
        const auto& x = ra->vars[i];
        const auto& y = rb->vars[i];
        if (x.var != y.var || x.mult != y.mult || !alpha_equal(x.type, y.type) || x.init != y.init)
          fail(a, b);
      }
      return LocalType::rec(ra->tvar, ra->vars, run(ra->body, rb->body));
    }
    fail(a, b);
  }

  MergeMode mode_;
};

class Projector {
 public:
  Projector(Role r, const ProjectOptions& opts, MergeMode mode)
      : r_(std::move(r)), opts_(opts), mode_(mode) {}

  LocalType go(const GlobalContext& gamma, const GlobalType& g) {
    if (g.is_end()) return LocalType::end();
    if (auto m = g.as<GMessage>()) return message(gamma, *m);
    if (auto rec = g.as<GRec>()) return recursion(gamma, *rec);
    return tvar(gamma, *g.as<GVar>());
  }

 private:
  struct Frame {
    const GRec* rec;
    std::vector<RoleSet> knowers;
  };

  std::string path() const {
    std::string s;
    for (const auto& p : path_) s += (s.empty() ? "" : " / ") + p;
    return s.empty() ? "top" : s;
  }

  [[noreturn]] void fail(ProjectionErrorKind k, const std::string& msg) const {
    throw ProjectionError(k, path(), msg);
  }

  void wf(const LocalContext& sigma, const RefinementType& t) {
    std::string why;
    if (!wf_type(sigma, t, &why))
      fail(ProjectionErrorKind::ExprTypeFailure, "ill-formed type '" + to_string(t) + "': " + why);
  }

  void check_expr(const LocalContext& sigma, const Expr& e, const RefinementType& t) {
    try {
      if (!opts_.check_refinements) {
        if (sort_expr(sigma, e) != t.base)
          fail(ProjectionErrorKind::ExprTypeFailure,
               "'" + to_string(e) + "' does not have sort " + std::string(to_string(t.base)));
        return;
      }
      auto res = check_type(sigma, e, t, opts_.oracle);
      if (!res) fail(ProjectionErrorKind::ExprTypeFailure, res.message);
    } catch (const TypeError& err) {
      fail(err.kind() == TypeErrorKind::IrrelevantVariableUse
               ? ProjectionErrorKind::IrrelevantVariableUse
               : ProjectionErrorKind::ExprTypeFailure,
           err.what());
    }
  }

  GlobalContext extend(const GlobalContext& gamma, const std::string& x, const RoleSet& knowers,
                       const RefinementType& t) {
    auto out = try_extend_global(gamma, x, knowers, t);
    if (!out)
      fail(ProjectionErrorKind::ExprTypeFailure,
           "binding '" + x + "' conflicts with an earlier binding of the same name");
    return *out;
  }

  LocalType message(const GlobalContext& gamma, const GMessage& m) {
    auto sigma = project_ctx(gamma, r_);
    std::vector<LBranch> branches;
    for (const auto& b : m.branches) {
      path_.push_back(m.from.name + "->" + m.to.name + ":" + b.label);
      wf(sigma, b.type);
      auto gi = extend(gamma, b.var, RoleSet{m.from, m.to}, b.type);
      branches.push_back(LBranch{b.label, b.var, b.type, go(gi, b.cont)});
      path_.pop_back();
    }
    if (r_ == m.from) return LocalType::send(m.to, std::move(branches));
    if (r_ == m.to) return LocalType::recv(m.from, std::move(branches));
    std::optional<LocalType> acc;
    Merger merger(mode_);
    for (const auto& b : branches) {
      auto li = LocalType::silent(b.label, b.var, b.type, b.cont);
      try {
        acc = acc ? merger.run(*acc, li) : li;
      } catch (const ProjectionError& e) {
        fail(ProjectionErrorKind::MergeFailure,
             "branches of " + m.from.name + "->" + m.to.name + " differ for " + r_.name + ": " +
                 e.what());
      }
    }
    return *acc;
  }

  LocalType recursion(const GlobalContext& gamma, const GRec& rec) {
    if (!participants(rec.body).count(r_)) return LocalType::end();
    path_.push_back("rec " + rec.tvar);
    auto sigma = project_ctx(gamma, r_);
    Frame frame{&rec, {}};
    GlobalContext inner = gamma;
    std::map<std::string, Expr> earlier;
    std::vector<LStateVar> lvars;
    for (const auto& v : rec.vars) {
      auto knowers = state_knowers(rec, v);
      bool knows = knowers.count(r_) > 0;
      wf(project_ctx(inner, r_), v.type);
      check_expr(knows ? sigma : promote(sigma), v.init, substitute(v.type, earlier));
      earlier[v.var] = v.init;
      inner = extend(inner, v.var, knowers, v.type);
      frame.knowers.push_back(knowers);
      lvars.push_back(LStateVar{v.var, knows ? Mult::Omega : Mult::Zero, v.type, v.init});
    }
    auto saved = frames_.find(rec.tvar) != frames_.end()
                     ? std::optional<Frame>(frames_.at(rec.tvar))
                     : std::nullopt;
    frames_.insert_or_assign(rec.tvar, frame);
    auto body = go(inner, rec.body);
    if (saved) frames_.insert_or_assign(rec.tvar, *saved);
    else frames_.erase(rec.tvar);
    path_.pop_back();
    try {
      return LocalType::rec(rec.tvar, std::move(lvars), body);
    } catch (const InvariantViolation& e) {
      fail(ProjectionErrorKind::NonContractive, e.what());
    }
  }

  LocalType tvar(const GlobalContext& gamma, const GVar& v) {
    auto it = frames_.find(v.tvar);
    if (it == frames_.end())
      fail(ProjectionErrorKind::FreeTypeVar, "free type variable '" + v.tvar + "'");
    const auto& rec = *it->second.rec;
    if (v.args.empty()) return LocalType::tvar(v.tvar);
    if (v.args.size() != rec.vars.size())
      fail(ProjectionErrorKind::ExprTypeFailure,
           "'" + v.tvar + "' expects " + std::to_string(rec.vars.size()) + " arguments");
    path_.push_back(v.tvar);
    auto sigma = project_ctx(gamma, r_);
    std::map<std::string, Expr> earlier;
    for (std::size_t i = 0; i < v.args.size(); ++i) {
      bool knows = it->second.knowers[i].count(r_) > 0;
      check_expr(knows ? sigma : promote(sigma), v.args[i], substitute(rec.vars[i].type, earlier));
      earlier[rec.vars[i].var] = v.args[i];
    }
    path_.pop_back();
    return LocalType::tvar(v.tvar, v.args);
  }

  Role r_;
  const ProjectOptions& opts_;
  MergeMode mode_;
  std::map<std::string, Frame> frames_;
  std::vector<std::string> path_;
};

}  // namespace

LocalType merge(const LocalContext&, const LocalType& a, const LocalType& b, MergeMode mode) {
  if (mode == MergeMode::Auto) {
    try {
      return Merger(MergeMode::Plain).run(a, b);
    } catch (const ProjectionError&) {
      return Merger(MergeMode::Full).run(a, b);
    }
  }
  return Merger(mode).run(a, b);
}

ProjectionResult project(const GlobalContext& ctx, const GlobalType& g, const Role& p,
                         const ProjectOptions& opts) {
  auto run = [&](MergeMode m) {
    ProjectionResult r;
    r.context = project_ctx(ctx, p);
    r.local_type = Projector(p, opts, m).go(ctx, g);
    r.merge_used = m;
    return r;
  };
  if (opts.merge != MergeMode::Auto) return run(opts.merge);
  try {
    return run(MergeMode::Plain);
  } catch (const ProjectionError& e) {
    if (e.kind() != ProjectionErrorKind::MergeFailure) throw;
  }
  return run(MergeMode::Full);
}

std::string to_string(const WellFormednessReport& r) {
  if (r.ok) return "well-formed";
  std::string out = "not well-formed";
  for (const auto& f : r.failures)
    out += "\n  role " + f.role.name + ": " + std::string(to_string(f.reason)) + " at " + f.path +
           ": " + f.message;
  return out;
}

WellFormednessReport well_formed(const GlobalContext& ctx, const GlobalType& g,
                                 const ProjectOptions& opts) {
  WellFormednessReport rep;
  const Role all{"*"};
  for (const auto& t : free_tvars(g))
    rep.failures.push_back({all, ProjectionErrorKind::FreeTypeVar, "top",
                            "free type variable '" + t + "'"});
  try {
    check_contractive(g);
  } catch (const InvariantViolation& e) {
    rep.failures.push_back({all, ProjectionErrorKind::NonContractive, "top", e.what()});
  }
  if (rep.failures.empty()) {
    for (const auto& r : participants(g)) {
      try {
        rep.projections.emplace(r, project(ctx, g, r, opts));
      } catch (const ProjectionError& e) {
        rep.failures.push_back({r, e.kind(), e.path(), e.what()});
      }
    }
  }
  rep.ok = rep.failures.empty();
  return rep;
}

namespace {

void scan_empty(const GlobalContext& ctx, const GlobalType& g, const Oracle& oracle, const std::string& path,
                std::vector<EmptyPayload>& out) {
  auto all_known = [&] {
    LocalContext c;
    for (const auto& e : ctx)
      if (auto n = try_extend_local(c, e.var, Mult::Omega, e.type)) c = *n;
    return c;
  };
  if (auto r = g.as<GRec>()) {
    GlobalContext c = ctx;
    for (const auto& v : r->vars) {
      auto lc = all_known();
      auto verdict = check_empty(lc, v.type, oracle);
      if (verdict.valid()) out.push_back({path + "rec " + r->tvar, v.var, v.type, verdict});
      if (auto n = try_extend_global(c, v.var, state_knowers(*r, v), v.type)) c = *n;
    }
    scan_empty(c, r->body, oracle, path + "rec " + r->tvar + " / ", out);
    return;
  }
  auto m = g.as<GMessage>();
  if (!m) return;
  auto lc = all_known();
  for (const auto& b : m->branches) {
    std::string here = path + m->from.name + "->" + m->to.name + ":" + b.label;
    auto verdict = check_empty(lc, b.type.with_binder(b.var), oracle);
    if (verdict.valid()) out.push_back({here, b.label, b.type, verdict});
    if (auto n = try_extend_global(ctx, b.var, RoleSet{m->from, m->to}, b.type))
      scan_empty(*n, b.cont, oracle, here + " / ", out);
  }
}

}  // namespace

std::vector<EmptyPayload> empty_payloads(const GlobalContext& ctx, const GlobalType& g, const Oracle& oracle) {
  std::vector<EmptyPayload> out;
  scan_empty(ctx, g, oracle, "", out);
  return out;
}

}  // namespace rmpst
