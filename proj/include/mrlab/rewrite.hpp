#pragma once

// Algebraic laws over logical plans.
//
//   1  select below join        s_c(R |x| S)      <=> s_c(R) |x| S
//   2  select below project     s_c(P_a(R))       <=> P_a(s_c(R))
//   3  join commutativity       R |x| S           <=> S |x| R
//   4  join associativity       R |x| (S |x| T)   <=> (R |x| S) |x| T
//   5  cascading projections    P_A(P_AuB(R))      => P_A(R)
//   6  project below join       P_A(R |x| S)       => P_AR(R) |x| P_AS(S)
//   7  project above join       (P_A(R)) |x| S     => P_AuAttrs(S)(R |x| S)
//
// Laws 1, 2 and 5 never increase the estimated cost ("sure" rules); law 6
// has to be cost-checked; law 7 is only used while enumerating.

#include <cstddef>
#include <vector>

#include "mrlab/catalog.hpp"
#include "mrlab/plan.hpp"

namespace mrlab {

enum class Law {
  SelectBelowJoin = 1,
  SelectBelowProject,
  JoinCommute,
  JoinAssociate,
  CascadeProjections,
  ProjectBelowJoin,
  ProjectAboveJoin
};

/// Every result of applying the law (either direction, where reversible) at
/// the root of the plan.
std::vector<Plan> apply_law_at_root(const Plan& plan, Law law);

/// Every result of applying the law once, at any node.
std::vector<Plan> apply_law_anywhere(const Plan& plan, Law law);

/// Applies laws 1, 2 and 5 in the forward direction until none applies.
/// Selections go to the left input when both inputs carry their columns. If
/// the input plan is safe, a rewrite is taken only when the result is safe.
Plan apply_sure_rules(const Plan& plan, const std::vector<BaseFd>& declared = {});

/// Same normal form without the safety check.
Plan sure_rule_normal_form(const Plan& plan);

struct Equivalents {
  std::vector<Plan> plans;  // the input plan first, then in discovery order
  bool truncated = false;   // stopped at the bound before reaching closure
};

/// Closure of the plan under laws 1-7, breadth first, capped at `bound`
/// plans. When the input is safe only safe plans are kept.
Equivalents generate_equivalents(const Plan& plan, std::size_t bound, const std::vector<BaseFd>& declared = {});

}  // namespace mrlab
