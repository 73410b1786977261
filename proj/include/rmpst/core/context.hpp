#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmpst/core/types.hpp"

namespace rmpst {

struct GlobalEntry {
  std::string var;
  RoleSet knowers;
  RefinementType type;
};

struct LocalEntry {
  std::string var;
  Mult mult = Mult::Omega;
  RefinementType type;
};

/// Ordered variable environment; later entries may mention earlier ones.
template <class Entry>
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const Entry* find(const std::string& var) const {
    for (const auto& e : entries_)
      if (e.var == var) return &e;
    return nullptr;
  }
  bool contains(const std::string& var) const { return find(var) != nullptr; }

  /// Unchecked append; use extend_global / extend_local for the rules.
  Context appended(Entry e) const {
    Context c = *this;
    c.entries_.push_back(std::move(e));
    return c;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 protected:
  std::vector<Entry> entries_;
  template <class E>
  friend Context<E> with_entry(const Context<E>&, std::size_t, E);
};

template <class E>
Context<E> with_entry(const Context<E>& c, std::size_t index, E e) {
  Context<E> out = c;
  out.entries_[index] = std::move(e);
  return out;
}

using GlobalContext = Context<GlobalEntry>;
using LocalContext = Context<LocalEntry>;

/// Typing context extension. Throws UndefinedExtension in the undefined case.
GlobalContext extend_global(const GlobalContext& ctx, const std::string& var, const RoleSet& knowers,
                            const RefinementType& type);
LocalContext extend_local(const LocalContext& ctx, const std::string& var, Mult mult,
                          const RefinementType& type);

std::optional<GlobalContext> try_extend_global(const GlobalContext& ctx, const std::string& var,
                                               const RoleSet& knowers, const RefinementType& type);
std::optional<LocalContext> try_extend_local(const LocalContext& ctx, const std::string& var,
                                             Mult mult, const RefinementType& type);

/// Structural equality with entry types compared up to binder renaming.
bool context_equal(const GlobalContext& a, const GlobalContext& b);
bool context_equal(const LocalContext& a, const LocalContext& b);

std::vector<std::string> domain(const GlobalContext& ctx);
std::vector<std::string> domain(const LocalContext& ctx);

}  // namespace rmpst
