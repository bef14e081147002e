#include "mrlab/safety.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "mrlab/errors.hpp"

namespace mrlab {

namespace {

FDSet declared_fds(const std::string& relation, const std::vector<std::string>& attributes,
                   const std::vector<BaseFd>& declared) {
  FDSet fds;
  for (const auto& fd : declared) {
    if (fd.relation != relation) continue;
    FunctionalDependency out;
    for (const auto* side : {&fd.lhs, &fd.rhs}) {
      for (const auto& attribute : *side) {
        if (std::find(attributes.begin(), attributes.end(), attribute) == attributes.end())
          throw SchemaError("FD on " + relation + " names unknown attribute " + attribute);
        (side == &fd.lhs ? out.lhs : out.rhs).insert({relation, attribute});
      }
    }
    fds.push_back(std::move(out));
  }
  return fds;
}

FunctionalDependency event_fd(const std::string& relation, const std::vector<std::string>& attributes) {
  FunctionalDependency fd{{QualifiedAttr::event_of(relation)}, {}};
  for (const auto& attribute : attributes) fd.rhs.insert({relation, attribute});
  return fd;
}

bool covers(const AttrSet& big, const AttrSet& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

FDSet base_fds(const ConjunctiveQuery& q, const std::vector<BaseFd>& declared) {
  FDSet fds;
  for (const auto& ref : q.relations) {
    auto more = declared_fds(ref.name, ref.attributes, declared);
    fds.insert(fds.end(), more.begin(), more.end());
  }
  return fds;
}

FDSet induced_fds(const ConjunctiveQuery& q, const FDSet& base) {
  auto known = [&](const QualifiedAttr& attr) {
    if (attr.event) return q.find(attr.relation) != nullptr;
    const auto* ref = q.find(attr.relation);
    return ref && std::find(ref->attributes.begin(), ref->attributes.end(), attr.attribute) != ref->attributes.end();
  };
  FDSet fds;
  for (const auto& fd : base) {
    for (const auto* side : {&fd.lhs, &fd.rhs})
      for (const auto& attr : *side)
        if (!known(attr)) throw SchemaError("FD names attribute " + attr.to_string() + " outside the query");
    fds.push_back(fd);
  }
  for (const auto& join : q.joins) {
    fds.push_back({{join.left}, {join.right}});
    fds.push_back({{join.right}, {join.left}});
  }
  for (const auto& sel : q.selections) fds.push_back({{}, {sel.attr}});
  for (const auto& ref : q.relations) fds.push_back(event_fd(ref.name, ref.attributes));
  return fds;
}

AttrSet attr_closure(const AttrSet& attrs, const FDSet& fds) {
  AttrSet closure = attrs;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& fd : fds) {
      if (!covers(closure, fd.lhs) || covers(closure, fd.rhs)) continue;
      closure.insert(fd.rhs.begin(), fd.rhs.end());
      changed = true;
    }
  }
  return closure;
}

bool is_safe_project(const AttrSet& attrs, const AttrSet& head, const std::vector<std::string>& relations,
                     const FDSet& fds) {
  for (const auto& relation : relations) {
    AttrSet seed = attrs;
    seed.insert(QualifiedAttr::event_of(relation));
    if (!covers(attr_closure(seed, fds), head)) return false;
  }
  return true;
}

bool is_safe_project(const AttrSet& attrs, const ConjunctiveQuery& q, const FDSet& fds) {
  std::vector<std::string> relations;
  for (const auto& ref : q.relations) relations.push_back(ref.name);
  return is_safe_project(attrs, AttrSet(q.head.begin(), q.head.end()), relations, induced_fds(q, fds));
}

// ---------------------------------------------------------------------------

namespace {

class SafePlanner {
 public:
  SafePlanner(const ConjunctiveQuery& q, const FDSet& base)
      : q_(q), names_(column_names(q)), fds_(induced_fds(q, base)) {}

  std::optional<Plan> plan() {
    std::vector<std::string> relations;
    for (const auto& ref : q_.relations) relations.push_back(ref.name);
    const auto head = head_columns(q_);
    return plan(relations, std::set<std::string>(head.begin(), head.end()));
  }

 private:
  std::vector<std::string> columns_of(const std::vector<std::string>& relations) const {
    std::vector<std::string> columns;
    for (const auto& relation : relations)
      for (const auto& attribute : q_.find(relation)->attributes) {
        const auto& name = names_.at({relation, attribute});
        if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
      }
    return columns;
  }

  AttrSet qualified(const std::set<std::string>& columns, const std::vector<std::string>& relations) const {
    AttrSet out;
    for (const auto& [attr, name] : names_)
      if (columns.count(name) &&
          std::find(relations.begin(), relations.end(), attr.relation) != relations.end())
        out.insert(attr);
    return out;
  }

  // FDs of the subquery over `relations`: those whose attributes all belong to it.
  FDSet restricted(const std::vector<std::string>& relations) const {
    auto inside = [&](const AttrSet& side) {
      return std::all_of(side.begin(), side.end(), [&](const QualifiedAttr& attr) {
        return std::find(relations.begin(), relations.end(), attr.relation) != relations.end();
      });
    };
    FDSet out;
    for (const auto& fd : fds_)
      if (inside(fd.lhs) && inside(fd.rhs)) out.push_back(fd);
    return out;
  }

  Plan join_all(const std::vector<std::string>& relations) const {
    Plan plan = query_leaf(q_, relations.front());
    for (std::size_t i = 1; i < relations.size(); ++i) plan = make_join(plan, query_leaf(q_, relations[i]));
    return plan;
  }

  static Plan project_onto(const std::set<std::string>& head, Plan child) {
    std::vector<std::string> columns;
    for (const auto& column : child->columns)
      if (head.count(column)) columns.push_back(column);
    if (columns.size() == child->columns.size()) return child;
    if (child->kind == PlanNode::Kind::Project) child = child->left;
    return make_project(std::move(columns), std::move(child));
  }

  std::optional<Plan> plan(const std::vector<std::string>& relations, const std::set<std::string>& head) {
    const auto attributes = columns_of(relations);
    if (std::all_of(attributes.begin(), attributes.end(), [&](const auto& a) { return head.count(a) > 0; }))
      return join_all(relations);

    const FDSet fds = restricted(relations);
    const AttrSet head_attrs = qualified(head, relations);
    for (const auto& extra : attributes) {
      if (head.count(extra)) continue;
      auto extended = head;
      extended.insert(extra);
      if (!is_safe_project(head_attrs, qualified(extended, relations), relations, fds)) continue;
      auto child = plan(relations, extended);
      if (!child) return std::nullopt;
      return project_onto(head, *child);
    }

    // Separate the relations into connected components of the join graph
    // restricted to predicates on non-head columns.
    std::vector<std::size_t> parent(relations.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto index_of = [&](const std::string& relation) -> std::optional<std::size_t> {
      const auto it = std::find(relations.begin(), relations.end(), relation);
      if (it == relations.end()) return std::nullopt;
      return static_cast<std::size_t>(it - relations.begin());
    };
    for (const auto& join : q_.joins) {
      const auto a = index_of(join.left.relation);
      const auto b = index_of(join.right.relation);
      if (!a || !b || head.count(names_.at(join.left))) continue;
      const auto ra = find(*a);
      const auto rb = find(*b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::vector<std::string>> components;
    std::map<std::size_t, std::size_t> component_of_root;
    for (std::size_t i = 0; i < relations.size(); ++i) {
      const auto root = find(i);
      auto [it, fresh] = component_of_root.emplace(root, components.size());
      if (fresh) components.emplace_back();
      components[it->second].push_back(relations[i]);
    }
    if (components.size() < 2) return std::nullopt;

    std::vector<std::string> first;
    for (std::size_t c = 0; c + 1 < components.size(); ++c)
      first.insert(first.end(), components[c].begin(), components[c].end());
    const auto& second = components.back();
    auto head_of = [&](const std::vector<std::string>& part) {
      std::set<std::string> out;
      for (const auto& column : columns_of(part))
        if (head.count(column)) out.insert(column);
      return out;
    };
    auto left = plan(first, head_of(first));
    if (!left) return std::nullopt;
    auto right = plan(second, head_of(second));
    if (!right) return std::nullopt;
    return make_join(*left, *right);
  }

  const ConjunctiveQuery& q_;
  std::map<QualifiedAttr, std::string> names_;
  FDSet fds_;
};

}  // namespace

std::optional<Plan> safe_plan(const ConjunctiveQuery& q, const FDSet& base) {
  if (q.relations.empty()) throw PlanError("query has no relations");
  return SafePlanner(q, base).plan();
}

// ---------------------------------------------------------------------------

namespace {

struct Analysis {
  std::map<std::string, AttrSet> bindings;  // output column -> attributes it carries
  FDSet fds;
  std::vector<std::string> relations;
};

void add_equalities(FDSet& fds, const AttrSet& a, const AttrSet& b) {
  if (a.empty() || b.empty()) return;
  fds.push_back({a, b});
  fds.push_back({b, a});
}

Analysis analyze(const Plan& plan, const std::vector<BaseFd>& declared) {
  switch (plan->kind) {
    case PlanNode::Kind::Scan: {
      Analysis out;
      for (std::size_t i = 0; i < plan->columns.size(); ++i)
        out.bindings[plan->columns[i]].insert({plan->relation, plan->base_attributes[i]});
      out.fds = declared_fds(plan->relation, plan->base_attributes, declared);
      out.fds.push_back(event_fd(plan->relation, plan->base_attributes));
      out.relations.push_back(plan->relation);
      return out;
    }
    case PlanNode::Kind::Select: {
      Analysis out = analyze(plan->left, declared);
      const auto& cond = plan->condition;
      if (cond.op == CompareOp::Eq) {
        if (cond.is_constant())
          out.fds.push_back({{}, out.bindings.at(cond.lhs)});
        else
          add_equalities(out.fds, out.bindings.at(cond.lhs), out.bindings.at(std::get<AttrRef>(cond.rhs).name));
      }
      return out;
    }
    case PlanNode::Kind::Project: {
      Analysis out = analyze(plan->left, declared);
      std::map<std::string, AttrSet> kept;
      for (const auto& column : plan->columns) kept[column] = out.bindings.at(column);
      out.bindings = std::move(kept);
      return out;
    }
    case PlanNode::Kind::Join: {
      Analysis out = analyze(plan->left, declared);
      Analysis right = analyze(plan->right, declared);
      for (const auto& column : plan->join_on) add_equalities(out.fds, out.bindings.at(column), right.bindings.at(column));
      for (auto& [column, attrs] : right.bindings) out.bindings[column].insert(attrs.begin(), attrs.end());
      out.fds.insert(out.fds.end(), right.fds.begin(), right.fds.end());
      out.relations.insert(out.relations.end(), right.relations.begin(), right.relations.end());
      return out;
    }
  }
  throw PlanError("unknown plan node");
}

}  // namespace

bool project_node_is_safe(const Plan& project, const std::vector<BaseFd>& declared) {
  if (project->kind != PlanNode::Kind::Project) throw PlanError("not a projection");
  const Analysis child = analyze(project->left, declared);
  AttrSet attrs;
  for (const auto& column : project->columns) attrs.insert(child.bindings.at(column).begin(), child.bindings.at(column).end());
  AttrSet head;
  for (const auto& [column, bound] : child.bindings) head.insert(bound.begin(), bound.end());
  return is_safe_project(attrs, head, child.relations, child.fds);
}

bool plan_is_safe(const Plan& plan, const std::vector<BaseFd>& declared) {
  if (plan->kind == PlanNode::Kind::Project && !project_node_is_safe(plan, declared)) return false;
  if (plan->left && !plan_is_safe(plan->left, declared)) return false;
  if (plan->right && !plan_is_safe(plan->right, declared)) return false;
  return true;
}

}  // namespace mrlab
