#include "rmpst/core/context.hpp"

#include "rmpst/core/error.hpp"

namespace rmpst {

namespace {

template <class Ctx>
std::optional<std::size_t> index_of(const Ctx& ctx, const std::string& var) {
  const auto& es = ctx.entries();
  for (std::size_t i = 0; i < es.size(); ++i)
    if (es[i].var == var) return i;
  return std::nullopt;
}

}  // namespace

std::optional<GlobalContext> try_extend_global(const GlobalContext& ctx, const std::string& var,
                                               const RoleSet& knowers, const RefinementType& type) {
  auto t = type.with_binder(var);
  auto i = index_of(ctx, var);
  if (!i) return ctx.appended(GlobalEntry{var, knowers, t});
  const auto& old = ctx.entries()[*i];
  if (!alpha_equal(old.type, t)) return std::nullopt;
  if (old.knowers.empty()) return with_entry(ctx, *i, GlobalEntry{var, knowers, old.type});
  if (old.knowers == knowers) return ctx;
  return std::nullopt;
}

std::optional<LocalContext> try_extend_local(const LocalContext& ctx, const std::string& var,
                                             Mult mult, const RefinementType& type) {
  auto t = type.with_binder(var);
  auto i = index_of(ctx, var);
  if (!i) return ctx.appended(LocalEntry{var, mult, t});
  const auto& old = ctx.entries()[*i];
  if (!alpha_equal(old.type, t)) return std::nullopt;
  if (old.mult == Mult::Zero) return with_entry(ctx, *i, LocalEntry{var, mult, old.type});
  if (mult == Mult::Omega) return ctx;
  return std::nullopt;
}

GlobalContext extend_global(const GlobalContext& ctx, const std::string& var,
                            const RoleSet& knowers, const RefinementType& type) {
  auto r = try_extend_global(ctx, var, knowers, type);
  if (!r) throw UndefinedExtension(var);
  return *r;
}

LocalContext extend_local(const LocalContext& ctx, const std::string& var, Mult mult,
                          const RefinementType& type) {
  auto r = try_extend_local(ctx, var, mult, type);
  if (!r) throw UndefinedExtension(var);
  return *r;
}

bool context_equal(const GlobalContext& a, const GlobalContext& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entries()[i];
    const auto& y = b.entries()[i];
    if (x.var != y.var || x.knowers != y.knowers || !alpha_equal(x.type, y.type)) return false;
  }
  return true;
}

bool context_equal(const LocalContext& a, const LocalContext& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entries()[i];
    const auto& y = b.entries()[i];
    if (x.var != y.var || x.mult != y.mult || !alpha_equal(x.type, y.type)) return false;
  }
  return true;
}

std::vector<std::string> domain(const GlobalContext& ctx) {
  std::vector<std::string> out;
  for (const auto& e : ctx) out.push_back(e.var);
  return out;
}

std::vector<std::string> domain(const LocalContext& ctx) {
  std::vector<std::string> out;
  for (const auto& e : ctx) out.push_back(e.var);
  return out;
}

}  // namespace rmpst
