#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mrlab/catalog.hpp"
#include "mrlab/plan.hpp"
#include "mrlab/prob.hpp"
#include "mrlab/query.hpp"
#include "mrlab/rewrite.hpp"

namespace mrlab {

/// Estimated statistics of an intermediate relation: row count and V for
/// sorted column lists.
struct NodeStats {
  double rows = 0.0;
  std::map<std::vector<std::string>, double> distinct;
};

enum class Pattern { Select, Project, Join, SelectProject, SelectJoin };

std::string to_string(Pattern pattern);

/// One MapReduce job. `node` is the plan node whose result the job produces
/// and `inputs` are the subtrees it reads (scans or results of earlier jobs).
struct PhysicalJob {
  Pattern pattern;
  Plan node;
  std::vector<Plan> inputs;
  double cost = 0.0;

  std::string to_string() const;
};

/// Jobs in execution order.
struct PhysicalPlan {
  std::vector<PhysicalJob> jobs;

  std::string to_string() const;
};

struct OptimizedPlan {
  PhysicalPlan physical;
  double cost = 0.0;
  double rows = 0.0;
};

/// Per-catalog cache of optimal covers and node statistics, keyed by plan
/// serialization. Entries are written once and never changed.
class Memo {
 public:
  std::optional<OptimizedPlan> find(const std::string& key) const;
  /// Stores the entry unless one exists; returns the stored entry.
  OptimizedPlan publish(const std::string& key, OptimizedPlan entry);

  std::optional<NodeStats> find_stats(const std::string& key) const;
  NodeStats publish_stats(const std::string& key, NodeStats stats);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, OptimizedPlan> plans_;
  std::map<std::string, NodeStats> stats_;
};

/// Estimated size. Selection: T/V(A) for A = c, T/max(V(A), V(B)) for A = B,
/// T/3 for an inequality, T for !=. Projection: V of the projected column
/// list when known, else min(T/2, prod V(a)); a projection keeping every
/// column keeps T. Join: T(R) T(S) / prod over shared columns of max V.
/// Intermediate V values are min(V, rows). Sizes are computed on the
/// sure-rule normal form of the subtree, so rewrites by laws 1, 2 and 5 never
/// change the size of what they rewrite. Throws CatalogMissError.
NodeStats estimate_stats(const Plan& plan, const Catalog& catalog, Memo* memo = nullptr);
double estimate_size(const Plan& plan, const Catalog& catalog, Memo* memo = nullptr);
/// Selection T, projection min(T, prod V(a)), join T(R) T(S).
double estimate_upper_bound(const Plan& plan, const Catalog& catalog);

/// Cost of one job: estimated map input plus reduce input.
double estimate_job_cost(const PhysicalJob& job, const Catalog& catalog, Memo* memo = nullptr);
double estimate_plan_cost(const PhysicalPlan& plan, const Catalog& catalog, Memo* memo = nullptr);

/// Cheapest cover of the plan by single-job patterns. Ties go to the job
/// list with the lexicographically smallest text.
OptimizedPlan opt_phy_plan(const Plan& plan, const Catalog& catalog, Memo& memo);
double plan_cost(const Plan& plan, const Catalog& catalog, Memo& memo);

/// Runs the jobs with the fused operators.
PlanResult execute_physical(const ProbDatabase& db, const Plan& plan, const PhysicalPlan& physical,
                            const OpOptions& options = {});

struct BestPlan {
  Plan initial;  // the safe plan before optimization
  double initial_cost = 0.0;
  Plan logical;
  PhysicalPlan physical;
  double cost = 0.0;
  bool truncated = false;  // the equivalent-plan search hit its bound
};

/// Safe plan, sure rules, then law 6 wherever it keeps the plan safe and
/// lowers the cost; finally the cheapest plan among the bounded closure of
/// safe equivalents. Throws NoSafePlanError.
BestPlan find_best_plan(const ConjunctiveQuery& q, const Catalog& catalog, std::size_t bound = 4096);

}  // namespace mrlab
