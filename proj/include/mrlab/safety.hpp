#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrlab/catalog.hpp"
#include "mrlab/plan.hpp"
#include "mrlab/query.hpp"

namespace mrlab {

using AttrSet = std::set<QualifiedAttr>;

struct FunctionalDependency {
  AttrSet lhs;
  AttrSet rhs;
  friend bool operator==(const FunctionalDependency&, const FunctionalDependency&) = default;
};

using FDSet = std::vector<FunctionalDependency>;

/// Declared FDs of the query's relations, qualified. Throws SchemaError when
/// an FD names an attribute its relation lacks.
FDSet base_fds(const ConjunctiveQuery& q, const std::vector<BaseFd>& declared);

/// base plus, per join predicate A = B, A -> B and B -> A; per constant
/// selection, {} -> A; per relation, R.E -> Attr(R).
FDSet induced_fds(const ConjunctiveQuery& q, const FDSet& base);

AttrSet attr_closure(const AttrSet& attrs, const FDSet& fds);

/// Projection onto `attrs` of a query with head `head` over `relations` is
/// safe iff attrs together with R.E determine the head for every relation R.
bool is_safe_project(const AttrSet& attrs, const AttrSet& head, const std::vector<std::string>& relations,
                     const FDSet& fds);
bool is_safe_project(const AttrSet& attrs, const ConjunctiveQuery& q, const FDSet& fds);

/// A plan whose extensional evaluation gives the exact answer probabilities,
/// or nullopt if none exists.
std::optional<Plan> safe_plan(const ConjunctiveQuery& q, const FDSet& base = {});

/// The projection safety test applied to one Project node of a plan.
bool project_node_is_safe(const Plan& project, const std::vector<BaseFd>& declared = {});
/// Every Project node of the plan passes the safety test.
bool plan_is_safe(const Plan& plan, const std::vector<BaseFd>& declared = {});

}  // namespace mrlab
