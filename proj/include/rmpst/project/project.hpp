#pragma once

#include <map>
#include <string>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/core/types.hpp"
#include "rmpst/refine/validity.hpp"

namespace rmpst {

enum class MergeMode { Plain, Full, Auto };

std::string_view to_string(MergeMode m);

enum class ProjectionErrorKind {
  MergeFailure,
  ExprTypeFailure,
  IrrelevantVariableUse,
  FreeTypeVar,
  NonContractive,
};

std::string_view to_string(ProjectionErrorKind k);

class ProjectionError : public Error {
 public:
  ProjectionError(ProjectionErrorKind kind, std::string path, const std::string& msg)
      : Error(msg), kind_(kind), path_(std::move(path)) {}
  ProjectionErrorKind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  ProjectionErrorKind kind_;
  std::string path_;
};

struct ProjectOptions {
  MergeMode merge = MergeMode::Auto;
  Oracle oracle = Oracle::solver();
  /// skip refinement obligations (sort and relevance checks still run)
  bool check_refinements = true;
};

struct ProjectionResult {
  LocalContext context;
  LocalType local_type;
  MergeMode merge_used = MergeMode::Plain;
};

/// Knower set of x^P becomes omega for p in P, 0 otherwise.
LocalContext project_ctx(const GlobalContext& ctx, const Role& p);

/// Plain: identical up to alpha. Full: see README. Throws ProjectionError.
LocalType merge(const LocalContext& ctx, const LocalType& a, const LocalType& b, MergeMode mode);

ProjectionResult project(const GlobalContext& ctx, const GlobalType& g, const Role& p,
                         const ProjectOptions& opts = {});

/// Knowers of a Rec state variable, resolving the default.
RoleSet state_knowers(const GRec& rec, const GStateVar& v);

struct RoleFailure {
  Role role;
  ProjectionErrorKind reason;
  std::string path;
  std::string message;
};

struct WellFormednessReport {
  bool ok = true;
  std::vector<RoleFailure> failures;
  std::map<Role, ProjectionResult> projections;
};

std::string to_string(const WellFormednessReport& r);

WellFormednessReport well_formed(const GlobalContext& ctx, const GlobalType& g,
                                 const ProjectOptions& opts = {});

struct EmptyPayload {
  std::string path;
  std::string label;
  RefinementType type;
  ValidityResult verdict;  // Valid: no value inhabits the type
};

/// Payload and state types with no inhabitant under the context where they
/// occur. Not an error: such branches can never be taken.
std::vector<EmptyPayload> empty_payloads(const GlobalContext& ctx, const GlobalType& g, const Oracle& oracle);

}  // namespace rmpst
