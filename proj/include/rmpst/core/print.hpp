#pragma once

#include <string>

#include "rmpst/core/context.hpp"
#include "rmpst/core/types.hpp"

namespace rmpst {

// Canonical one-line text syntax; parse_* in the frontend reads it back.
std::string to_string(const Expr& e);
std::string to_string(const RefinementType& t);
std::string to_string(const GlobalType& g);
std::string to_string(const LocalType& l);
std::string to_string(const GlobalContext& ctx);
std::string to_string(const LocalContext& ctx);
std::string to_string(const Action& a);
std::string to_string(const RoleSet& roles);
inline const std::string& to_string(const Role& r) { return r.name; }
std::string_view to_string(Mult m);

/// Type text with every bound variable renamed in binding order, so two
/// types are alpha-equivalent iff their canonical texts are equal.
std::string canonical_text(const GlobalType& g);
std::string canonical_text(const LocalType& l);

/// Payload type text with the binder fixed to a canonical name.
std::string canonical_text(const RefinementType& t);

}  // namespace rmpst
