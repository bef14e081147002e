#include "mrlab/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "mrlab/safety.hpp"

namespace mrlab {

namespace {

bool has_all(const std::vector<std::string>& columns, const std::vector<std::string>& names) {
  return std::all_of(names.begin(), names.end(), [&](const std::string& name) {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  });
}

bool has(const std::vector<std::string>& columns, const std::string& name) {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

Plan rebuild(const Plan& node, Plan left, Plan right) {
  switch (node->kind) {
    case PlanNode::Kind::Select: return make_select(node->condition, std::move(left));
    case PlanNode::Kind::Project: return make_project(node->columns, std::move(left));
    case PlanNode::Kind::Join: return make_join(std::move(left), std::move(right));
    case PlanNode::Kind::Scan: break;
  }
  return node;
}

using Kind = PlanNode::Kind;

void select_below_join(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind == Kind::Select && plan->left->kind == Kind::Join) {
    const auto& join = plan->left;
    const auto names = plan->condition.attributes();
    if (has_all(join->left->columns, names))
      out.push_back(make_join(make_select(plan->condition, join->left), join->right));
    if (has_all(join->right->columns, names))
      out.push_back(make_join(join->left, make_select(plan->condition, join->right)));
  }
  if (plan->kind == Kind::Join) {
    if (plan->left->kind == Kind::Select)
      out.push_back(make_select(plan->left->condition, make_join(plan->left->left, plan->right)));
    if (plan->right->kind == Kind::Select)
      out.push_back(make_select(plan->right->condition, make_join(plan->left, plan->right->left)));
  }
}

void select_below_project(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind == Kind::Select && plan->left->kind == Kind::Project)
    out.push_back(make_project(plan->left->columns, make_select(plan->condition, plan->left->left)));
  if (plan->kind == Kind::Project && plan->left->kind == Kind::Select &&
      has_all(plan->columns, plan->left->condition.attributes()))
    out.push_back(make_select(plan->left->condition, make_project(plan->columns, plan->left->left)));
}

void join_commute(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind == Kind::Join) out.push_back(make_join(plan->right, plan->left));
}

void join_associate(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind != Kind::Join) return;
  if (plan->left->kind == Kind::Join)
    out.push_back(make_join(plan->left->left, make_join(plan->left->right, plan->right)));
  if (plan->right->kind == Kind::Join)
    out.push_back(make_join(make_join(plan->left, plan->right->left), plan->right->right));
}

void cascade_projections(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind == Kind::Project && plan->left->kind == Kind::Project)
    out.push_back(make_project(plan->columns, plan->left->left));
}

void project_below_join(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind != Kind::Project || plan->left->kind != Kind::Join) return;
  const auto& join = plan->left;
  if (!has_all(plan->columns, join->join_on)) return;
  auto side = [&](const Plan& input) {
    std::vector<std::string> kept;
    for (const auto& column : input->columns)
      if (has(plan->columns, column)) kept.push_back(column);
    return kept;
  };
  const auto left_kept = side(join->left);
  const auto right_kept = side(join->right);
  if (left_kept.empty() || right_kept.empty()) return;
  const bool left_same = left_kept.size() == join->left->columns.size();
  const bool right_same = right_kept.size() == join->right->columns.size();
  if (left_same && right_same) return;
  out.push_back(make_join(left_same ? join->left : make_project(left_kept, join->left),
                          right_same ? join->right : make_project(right_kept, join->right)));
}

void project_above_join(const Plan& plan, std::vector<Plan>& out) {
  if (plan->kind != Kind::Join) return;
  const auto& left = plan->left;
  const auto& right = plan->right;
  auto dropped_collide = [](const Plan& project, const Plan& other) {
    for (const auto& column : project->left->columns)
      if (!has(project->columns, column) && has(other->columns, column)) return true;
    return false;
  };
  if (left->kind == Kind::Project && !dropped_collide(left, right))
    out.push_back(make_project(plan->columns, make_join(left->left, right)));
  if (right->kind == Kind::Project && !dropped_collide(right, left))
    out.push_back(make_project(plan->columns, make_join(left, right->left)));
}

using RootRule = std::function<void(const Plan&, std::vector<Plan>&)>;

RootRule rule_for(Law law) {
  switch (law) {
    case Law::SelectBelowJoin: return select_below_join;
    case Law::SelectBelowProject: return select_below_project;
    case Law::JoinCommute: return join_commute;
    case Law::JoinAssociate: return join_associate;
    case Law::CascadeProjections: return cascade_projections;
    case Law::ProjectBelowJoin: return project_below_join;
    case Law::ProjectAboveJoin: return project_above_join;
  }
  return {};
}

void anywhere(const Plan& plan, const RootRule& rule, std::vector<Plan>& out) {
  rule(plan, out);
  if (plan->left) {
    std::vector<Plan> inner;
    anywhere(plan->left, rule, inner);
    for (auto& child : inner) out.push_back(rebuild(plan, std::move(child), plan->right));
  }
  if (plan->right) {
    std::vector<Plan> inner;
    anywhere(plan->right, rule, inner);
    for (auto& child : inner) out.push_back(rebuild(plan, plan->left, std::move(child)));
  }
}

// Forward sure-rule rewrites at the root, in preference order.
std::vector<Plan> sure_at_root(const Plan& plan) {
  std::vector<Plan> out;
  if (plan->kind == Kind::Select && plan->left->kind == Kind::Join) {
    const auto& join = plan->left;
    const auto names = plan->condition.attributes();
    if (has_all(join->left->columns, names))
      out.push_back(make_join(make_select(plan->condition, join->left), join->right));
    else if (has_all(join->right->columns, names))
      out.push_back(make_join(join->left, make_select(plan->condition, join->right)));
  }
  if (plan->kind == Kind::Select && plan->left->kind == Kind::Project)
    out.push_back(make_project(plan->left->columns, make_select(plan->condition, plan->left->left)));
  cascade_projections(plan, out);
  return out;
}

// First accepted sure-rule step in pre-order.
std::optional<Plan> sure_step(const Plan& plan, const std::function<bool(const Plan&)>& accept,
                              const std::function<Plan(const Plan&)>& wrap) {
  for (auto& candidate : sure_at_root(plan)) {
    Plan whole = wrap(candidate);
    if (accept(whole)) return whole;
  }
  if (plan->left) {
    auto step = sure_step(plan->left, accept, [&](const Plan& child) { return wrap(rebuild(plan, child, plan->right)); });
    if (step) return step;
  }
  if (plan->right) {
    auto step = sure_step(plan->right, accept, [&](const Plan& child) { return wrap(rebuild(plan, plan->left, child)); });
    if (step) return step;
  }
  return std::nullopt;
}

Plan sure_fixpoint(Plan plan, const std::function<bool(const Plan&)>& accept) {
  const auto identity = [](const Plan& p) { return p; };
  while (auto next = sure_step(plan, accept, identity)) plan = *next;
  return plan;
}

}  // namespace

std::vector<Plan> apply_law_at_root(const Plan& plan, Law law) {
  std::vector<Plan> out;
  rule_for(law)(plan, out);
  return out;
}

std::vector<Plan> apply_law_anywhere(const Plan& plan, Law law) {
  std::vector<Plan> out;
  anywhere(plan, rule_for(law), out);
  return out;
}

Plan apply_sure_rules(const Plan& plan, const std::vector<BaseFd>& declared) {
  if (!plan_is_safe(plan, declared)) return sure_rule_normal_form(plan);
  return sure_fixpoint(plan, [&](const Plan& candidate) { return plan_is_safe(candidate, declared); });
}

Plan sure_rule_normal_form(const Plan& plan) {
  return sure_fixpoint(plan, [](const Plan&) { return true; });
}

Equivalents generate_equivalents(const Plan& plan, std::size_t bound, const std::vector<BaseFd>& declared) {
  if (bound == 0) bound = 1;
  const bool keep_safe = plan_is_safe(plan, declared);
  Equivalents result;
  std::set<std::string> seen{serialize(plan)};
  result.plans.push_back(plan);
  static const Law laws[] = {Law::SelectBelowJoin,    Law::SelectBelowProject, Law::JoinCommute,
                             Law::JoinAssociate,      Law::CascadeProjections, Law::ProjectBelowJoin,
                             Law::ProjectAboveJoin};
  for (std::size_t next = 0; next < result.plans.size(); ++next) {
    const Plan current = result.plans[next];
    for (Law law : laws) {
      for (auto& candidate : apply_law_anywhere(current, law)) {
        if (!seen.insert(serialize(candidate)).second) continue;
        if (keep_safe && !plan_is_safe(candidate, declared)) continue;
        if (result.plans.size() >= bound) {
          result.truncated = true;
          return result;
        }
        result.plans.push_back(std::move(candidate));
      }
    }
  }
  return result;
}

}  // namespace mrlab
