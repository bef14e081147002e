#pragma once

// The relational operators, each executed as one MapReduce job with
// extensional probability rules: selection keeps probabilities, join
// multiplies them and projection merges duplicates as 1 - prod(1 - p).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrlab/engine.hpp"
#include "mrlab/relation.hpp"

namespace mrlab {

enum class CompareOp { Lt, Le, Eq, Ne, Ge, Gt };

std::string to_string(CompareOp op);

struct AttrRef {
  std::string name;
  friend auto operator<=>(const AttrRef&, const AttrRef&) = default;
};

/// `lhs op rhs` where rhs is another attribute or a constant.
struct Condition {
  std::string lhs;
  CompareOp op = CompareOp::Eq;
  std::variant<AttrRef, Value> rhs;

  bool is_constant() const { return std::holds_alternative<Value>(rhs); }
  std::vector<std::string> attributes() const;

  friend auto operator<=>(const Condition&, const Condition&) = default;
  friend bool operator==(const Condition&, const Condition&) = default;
};

/// `did=1`, `dname='R&D'`, `a<=b`, `a!=b`.
std::string to_string(const Condition& condition);

bool compare(const Value& a, CompareOp op, const Value& b);

/// Throws SchemaError if an attribute of the condition is missing.
bool evaluate(const Condition& condition, const Schema& schema, const Row& row);

struct JoinOn {
  std::string left;
  std::string right;
  friend auto operator<=>(const JoinOn&, const JoinOn&) = default;
};

struct OpOptions {
  std::size_t split_size = 4;
  std::size_t num_reducers = 2;
  unsigned workers = 1;
  bool track_lineage = true;
};

struct OpResult {
  Relation relation;
  CostCounters counters;
};

OpResult op_select(const Relation& r, const std::vector<Condition>& conditions, const OpOptions& options = {});
OpResult op_select(const Relation& r, const Condition& condition, const OpOptions& options = {});

OpResult op_project(const Relation& r, const std::vector<std::string>& attributes,
                    const OpOptions& options = {});

/// Equi-join. Without `on` the join is natural over the shared attribute
/// names. A pair with equal names yields one output column, a pair with
/// different names keeps both. Any other shared name is a SchemaError.
/// An empty `on` list is a cross product.
OpResult op_join(const Relation& r, const Relation& s, const std::optional<std::vector<JoinOn>>& on = std::nullopt,
                 const OpOptions& options = {});

/// Selection and projection in one job: the mapper filters and restricts.
OpResult op_select_project(const Relation& r, const std::vector<Condition>& conditions,
                           const std::vector<std::string>& attributes, const OpOptions& options = {});

/// Selection on either input followed by a join, in one job.
OpResult op_select_join(const Relation& r, const Relation& s, const std::vector<Condition>& r_conditions,
                        const std::vector<Condition>& s_conditions,
                        const std::optional<std::vector<JoinOn>>& on = std::nullopt,
                        const OpOptions& options = {});

/// Output schema of op_join, without running it.
Schema join_schema(const Schema& r, const Schema& s, const std::optional<std::vector<JoinOn>>& on);

}  // namespace mrlab
