#include "mrlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mrlab/errors.hpp"
#include "mrlab/safety.hpp"

namespace mrlab {

std::string to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::Select: return "SELECT";
    case Pattern::Project: return "PROJECT";
    case Pattern::Join: return "JOIN";
    case Pattern::SelectProject: return "SELECT_PROJECT";
    case Pattern::SelectJoin: return "SELECT_JOIN";
  }
  return "?";
}

std::string PhysicalJob::to_string() const {
  std::string out = mrlab::to_string(pattern) + " " + serialize(node) + " <-";
  for (std::size_t i = 0; i < inputs.size(); ++i) out += (i ? "; " : " ") + serialize(inputs[i]);
  return out;
}

std::string PhysicalPlan::to_string() const {
  std::string out;
  for (const auto& job : jobs) out += job.to_string() + "\n";
  return out;
}

std::optional<OptimizedPlan> Memo::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = plans_.find(key);
  if (it == plans_.end()) return std::nullopt;
  return it->second;
}

OptimizedPlan Memo::publish(const std::string& key, OptimizedPlan entry) {
  std::lock_guard lock(mutex_);
  return plans_.emplace(key, std::move(entry)).first->second;
}

std::optional<NodeStats> Memo::find_stats(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = stats_.find(key);
  if (it == stats_.end()) return std::nullopt;
  return it->second;
}

NodeStats Memo::publish_stats(const std::string& key, NodeStats stats) {
  std::lock_guard lock(mutex_);
  return stats_.emplace(key, std::move(stats)).first->second;
}

// ---------------------------------------------------------------------------
// Size estimation

namespace {

using Kind = PlanNode::Kind;

double clamp_distinct(double v) { return std::max(v, 1.0); }

double single(const NodeStats& stats, const std::string& column) {
  const auto it = stats.distinct.find({column});
  if (it == stats.distinct.end()) throw CatalogMissError("no V statistic for column " + column);
  return it->second;
}

void cap_distinct(NodeStats& stats) {
  for (auto& [columns, v] : stats.distinct) v = clamp_distinct(std::min(v, stats.rows));
}

bool same_set(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

enum class Bound { Estimate, Upper };

NodeStats raw_stats(const Plan& plan, const Catalog& catalog, Bound bound, Memo* memo);

NodeStats compute_raw(const Plan& plan, const Catalog& catalog, Bound bound, Memo* memo) {
  NodeStats out;
  switch (plan->kind) {
    case Kind::Scan: {
      out.rows = catalog.rows(plan->relation);
      for (const auto& [attributes, v] : catalog.distinct(plan->relation)) {
        std::vector<std::string> columns;
        for (const auto& attribute : attributes) {
          const auto it = std::find(plan->base_attributes.begin(), plan->base_attributes.end(), attribute);
          if (it == plan->base_attributes.end()) break;
          columns.push_back(plan->columns[static_cast<std::size_t>(it - plan->base_attributes.begin())]);
        }
        if (columns.size() != attributes.size()) continue;
        std::sort(columns.begin(), columns.end());
        out.distinct[columns] = v;
      }
      break;
    }
    case Kind::Select: {
      const NodeStats child = raw_stats(plan->left, catalog, bound, memo);
      out = child;
      if (bound == Bound::Estimate) {
        const auto& cond = plan->condition;
        switch (cond.op) {
          case CompareOp::Eq:
            if (cond.is_constant())
              out.rows = child.rows / clamp_distinct(single(child, cond.lhs));
            else
              out.rows = child.rows / clamp_distinct(std::max(single(child, cond.lhs),
                                                              single(child, std::get<AttrRef>(cond.rhs).name)));
            break;
          case CompareOp::Ne: out.rows = child.rows; break;
          default: out.rows = child.rows / 3.0; break;
        }
      }
      break;
    }
    case Kind::Project: {
      const NodeStats child = raw_stats(plan->left, catalog, bound, memo);
      auto key = plan->columns;
      std::sort(key.begin(), key.end());
      double product = 1.0;
      auto product_of_singles = [&] {
        for (const auto& column : plan->columns) product *= single(child, column);
        return product;
      };
      if (same_set(plan->columns, plan->left->columns)) {
        out.rows = child.rows;
      } else if (plan->columns.empty()) {
        out.rows = std::min(child.rows, 1.0);
      } else if (bound == Bound::Upper) {
        out.rows = std::min(child.rows, product_of_singles());
      } else if (const auto it = child.distinct.find(key); it != child.distinct.end()) {
        out.rows = std::min(it->second, child.rows);
      } else {
        out.rows = std::min(child.rows / 2.0, product_of_singles());
      }
      for (const auto& [columns, v] : child.distinct)
        if (std::all_of(columns.begin(), columns.end(), [&](const auto& c) {
              return std::find(plan->columns.begin(), plan->columns.end(), c) != plan->columns.end();
            }))
          out.distinct[columns] = v;
      break;
    }
    case Kind::Join: {
      const NodeStats left = raw_stats(plan->left, catalog, bound, memo);
      const NodeStats right = raw_stats(plan->right, catalog, bound, memo);
      out.rows = left.rows * right.rows;
      if (bound == Bound::Estimate)
        for (const auto& column : plan->join_on)
          out.rows /= clamp_distinct(std::max(single(left, column), single(right, column)));
      out.distinct = left.distinct;
      for (const auto& [columns, v] : right.distinct) {
        auto [it, fresh] = out.distinct.emplace(columns, v);
        if (!fresh) it->second = std::min(it->second, v);
      }
      break;
    }
  }
  out.rows = std::max(out.rows, 0.0);
  cap_distinct(out);
  return out;
}

NodeStats raw_stats(const Plan& plan, const Catalog& catalog, Bound bound, Memo* memo) {
  if (!memo) return compute_raw(plan, catalog, bound, memo);
  const std::string key = (bound == Bound::Estimate ? "raw:" : "upper:") + serialize(plan);
  if (auto hit = memo->find_stats(key)) return *hit;
  return memo->publish_stats(key, compute_raw(plan, catalog, bound, memo));
}

}  // namespace

NodeStats estimate_stats(const Plan& plan, const Catalog& catalog, Memo* memo) {
  if (!memo) return raw_stats(sure_rule_normal_form(plan), catalog, Bound::Estimate, nullptr);
  const std::string key = "node:" + serialize(plan);
  if (auto hit = memo->find_stats(key)) return *hit;
  return memo->publish_stats(key, raw_stats(sure_rule_normal_form(plan), catalog, Bound::Estimate, memo));
}

double estimate_size(const Plan& plan, const Catalog& catalog, Memo* memo) {
  return estimate_stats(plan, catalog, memo).rows;
}

double estimate_upper_bound(const Plan& plan, const Catalog& catalog) {
  return raw_stats(sure_rule_normal_form(plan), catalog, Bound::Upper, nullptr).rows;
}

// ---------------------------------------------------------------------------
// Physical planning

double estimate_job_cost(const PhysicalJob& job, const Catalog& catalog, Memo* memo) {
  auto rows = [&](const Plan& p) { return estimate_size(p, catalog, memo); };
  switch (job.pattern) {
    case Pattern::Select: return rows(job.inputs.at(0));
    case Pattern::Project: return 2.0 * rows(job.inputs.at(0));
    case Pattern::SelectProject: return rows(job.inputs.at(0)) + rows(job.node->left);
    case Pattern::Join: return 2.0 * (rows(job.inputs.at(0)) + rows(job.inputs.at(1)));
    case Pattern::SelectJoin:
      return rows(job.inputs.at(0)) + rows(job.inputs.at(1)) + rows(job.node->left) + rows(job.node->right);
  }
  return 0.0;
}

double estimate_plan_cost(const PhysicalPlan& plan, const Catalog& catalog, Memo* memo) {
  double total = 0.0;
  for (const auto& job : plan.jobs) total += estimate_job_cost(job, catalog, memo);
  return total;
}

namespace {

Plan chain_base(Plan plan) {
  while (plan->kind == Kind::Select) plan = plan->left;
  return plan;
}

bool better(const OptimizedPlan& candidate, const OptimizedPlan& best, bool have_best) {
  if (!have_best) return true;
  const double tolerance = 1e-9 * std::max({1.0, std::abs(candidate.cost), std::abs(best.cost)});
  if (candidate.cost < best.cost - tolerance) return true;
  if (candidate.cost > best.cost + tolerance) return false;
  return candidate.physical.to_string() < best.physical.to_string();
}

}  // namespace

OptimizedPlan opt_phy_plan(const Plan& plan, const Catalog& catalog, Memo& memo) {
  const std::string key = serialize(plan);
  if (auto hit = memo.find(key)) return *hit;

  const double rows = estimate_size(plan, catalog, &memo);
  if (plan->kind == Kind::Scan) return memo.publish(key, OptimizedPlan{{}, 0.0, rows});

  OptimizedPlan best;
  bool have_best = false;
  auto consider = [&](Pattern pattern, std::vector<Plan> inputs) {
    OptimizedPlan candidate;
    candidate.rows = rows;
    for (const auto& input : inputs) {
      const auto sub = opt_phy_plan(input, catalog, memo);
      candidate.physical.jobs.insert(candidate.physical.jobs.end(), sub.physical.jobs.begin(),
                                     sub.physical.jobs.end());
      candidate.cost += sub.cost;
    }
    PhysicalJob job{pattern, plan, std::move(inputs), 0.0};
    job.cost = estimate_job_cost(job, catalog, &memo);
    candidate.cost += job.cost;
    candidate.physical.jobs.push_back(std::move(job));
    if (better(candidate, best, have_best)) {
      best = std::move(candidate);
      have_best = true;
    }
  };

  switch (plan->kind) {
    case Kind::Select:
      consider(Pattern::Select, {chain_base(plan)});
      break;
    case Kind::Project:
      consider(Pattern::Project, {plan->left});
      if (plan->left->kind == Kind::Select) consider(Pattern::SelectProject, {chain_base(plan->left)});
      break;
    case Kind::Join: {
      consider(Pattern::Join, {plan->left, plan->right});
      const bool left_select = plan->left->kind == Kind::Select;
      const bool right_select = plan->right->kind == Kind::Select;
      if (left_select) consider(Pattern::SelectJoin, {chain_base(plan->left), plan->right});
      if (right_select) consider(Pattern::SelectJoin, {plan->left, chain_base(plan->right)});
      if (left_select && right_select)
        consider(Pattern::SelectJoin, {chain_base(plan->left), chain_base(plan->right)});
      break;
    }
    case Kind::Scan:
      break;
  }
  return memo.publish(key, std::move(best));
}

double plan_cost(const Plan& plan, const Catalog& catalog, Memo& memo) {
  return opt_phy_plan(plan, catalog, memo).cost;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::vector<Condition> conditions_between(Plan top, const Plan& bottom) {
  std::vector<Condition> conditions;
  while (top != bottom) {
    if (top->kind != Kind::Select) throw PlanError("job input is not below a selection chain");
    conditions.push_back(top->condition);
    top = top->left;
  }
  return conditions;
}

}  // namespace

PlanResult execute_physical(const ProbDatabase& db, const Plan& plan, const PhysicalPlan& physical,
                            const OpOptions& options) {
  std::map<std::string, Relation> results;
  auto input = [&](const Plan& p) -> Relation {
    if (p->kind == Kind::Scan) return evaluate_scan(db, p);
    const auto it = results.find(serialize(p));
    if (it == results.end()) throw PlanError("job input " + serialize(p) + " has not been computed");
    return it->second;
  };

  PlanResult out;
  for (const auto& job : physical.jobs) {
    OpResult step;
    switch (job.pattern) {
      case Pattern::Select:
        step = op_select(input(job.inputs.at(0)), conditions_between(job.node, job.inputs.at(0)), options);
        break;
      case Pattern::Project:
        step = op_project(input(job.inputs.at(0)), job.node->columns, options);
        break;
      case Pattern::SelectProject:
        step = op_select_project(input(job.inputs.at(0)), conditions_between(job.node->left, job.inputs.at(0)),
                                 job.node->columns, options);
        break;
      case Pattern::Join:
        step = op_join(input(job.inputs.at(0)), input(job.inputs.at(1)), std::nullopt, options);
        break;
      case Pattern::SelectJoin:
        step = op_select_join(input(job.inputs.at(0)), input(job.inputs.at(1)),
                              conditions_between(job.node->left, job.inputs.at(0)),
                              conditions_between(job.node->right, job.inputs.at(1)), std::nullopt, options);
        break;
    }
    out.counters += step.counters;
    results[serialize(job.node)] = std::move(step.relation);
  }
  if (plan->kind == Kind::Scan) {
    out.relation = evaluate_scan(db, plan);
  } else {
    const auto it = results.find(serialize(plan));
    if (it == results.end()) throw PlanError("physical plan does not produce " + serialize(plan));
    out.relation = std::move(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------

BestPlan find_best_plan(const ConjunctiveQuery& q, const Catalog& catalog, std::size_t bound) {
  const auto& declared = catalog.fds();
  auto safe = safe_plan(q, base_fds(q, declared));
  if (!safe) throw NoSafePlanError();

  Memo memo;
  BestPlan out;
  out.initial = *safe;
  out.initial_cost = plan_cost(*safe, catalog, memo);

  // Sure rules, then the checked rule wherever it pays off.
  Plan current = apply_sure_rules(*safe, declared);
  double current_cost = plan_cost(current, catalog, memo);
  for (bool improved = true; improved;) {
    improved = false;
    for (const auto& pushed : apply_law_anywhere(current, Law::ProjectBelowJoin)) {
      Plan candidate = apply_sure_rules(pushed, declared);
      if (!plan_is_safe(candidate, declared)) continue;
      const double cost = plan_cost(candidate, catalog, memo);
      if (cost < current_cost) {
        current = candidate;
        current_cost = cost;
        improved = true;
        break;
      }
    }
  }

  // The cheapest of everything reachable from the safe plan by the laws.
  auto equivalents = generate_equivalents(*safe, bound, declared);
  out.truncated = equivalents.truncated;
  equivalents.plans.push_back(current);
  Plan best = current;
  OptimizedPlan best_opt = opt_phy_plan(current, catalog, memo);
  for (const auto& plan : equivalents.plans) {
    auto opt = opt_phy_plan(plan, catalog, memo);
    const double tolerance = 1e-9 * std::max({1.0, opt.cost, best_opt.cost});
    if (opt.cost < best_opt.cost - tolerance ||
        (opt.cost <= best_opt.cost + tolerance && serialize(plan) < serialize(best))) {
      best = plan;
      best_opt = std::move(opt);
    }
  }
  out.logical = best;
  out.physical = best_opt.physical;
  out.cost = best_opt.cost;
  return out;
}

}  // namespace mrlab
