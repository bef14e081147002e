#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrlab/ops.hpp"

namespace mrlab {

struct PlanNode;
using Plan = std::shared_ptr<const PlanNode>;

/// Logical plan node. Joins are natural joins over the shared column names;
/// a scan may rename the base attributes of its relation.
struct PlanNode {
  enum class Kind { Scan, Select, Project, Join };

  Kind kind = Kind::Scan;
  /// Output columns, in order.
  std::vector<std::string> columns;

  std::string relation;                      // Scan
  std::vector<std::string> base_attributes;  // Scan, same length as columns
  Condition condition;                       // Select
  std::vector<std::string> join_on;          // Join, sorted shared columns
  Plan left;                                 // child of Select/Project, left input of Join
  Plan right;                                // Join
};

/// Base attributes of a relation, or nullopt if unknown.
using SchemaLookup = std::function<std::optional<std::vector<std::string>>(const std::string&)>;

Plan make_scan(const std::string& relation, const std::vector<std::string>& base_attributes,
               std::vector<std::string> columns = {});
Plan make_select(Condition condition, Plan child);
Plan make_project(std::vector<std::string> columns, Plan child);
Plan make_join(Plan left, Plan right);

/// Prefix form, e.g. `project[did,rid](join[did](scan Emp, scan Dept))`.
std::string serialize(const Plan& plan);

/// Inverse of serialize; throws ParseError or PlanError.
Plan parse_plan(const std::string& text, const SchemaLookup& lookup);

/// The two hand-written plans for the employee example, `P1` (joins first,
/// project last) and `P2` (project each relation first).
std::optional<std::string> builtin_plan_text(const std::string& name);

std::vector<std::string> plan_relations(const Plan& plan);
bool same_plan(const Plan& a, const Plan& b);
std::size_t count_joins(const Plan& plan);

}  // namespace mrlab
