#include "mrlab/ops.hpp"

#include <algorithm>
#include <map>

#include "mrlab/errors.hpp"

namespace mrlab {

std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Ge: return ">=";
    case CompareOp::Gt: return ">";
  }
  return "?";
}

std::vector<std::string> Condition::attributes() const {
  std::vector<std::string> names{lhs};
  if (const auto* ref = std::get_if<AttrRef>(&rhs)) names.push_back(ref->name);
  return names;
}

std::string to_string(const Condition& condition) {
  std::string out = condition.lhs + to_string(condition.op);
  if (const auto* ref = std::get_if<AttrRef>(&condition.rhs)) return out + ref->name;
  return out + to_literal(std::get<Value>(condition.rhs));
}

bool compare(const Value& a, CompareOp op, const Value& b) {
  switch (op) {
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Ge: return a >= b;
    case CompareOp::Gt: return a > b;
  }
  return false;
}

bool evaluate(const Condition& condition, const Schema& schema, const Row& row) {
  const Value& left = row[schema.require(condition.lhs)];
  if (const auto* ref = std::get_if<AttrRef>(&condition.rhs))
    return compare(left, condition.op, row[schema.require(ref->name)]);
  return compare(left, condition.op, std::get<Value>(condition.rhs));
}

namespace {

using Record = KeyValue<std::size_t, ProbTuple>;

std::vector<Split<std::size_t, ProbTuple>> splits_of(std::initializer_list<const Relation*> inputs,
                                                      std::size_t split_size) {
  std::vector<Record> records;
  std::size_t side = 0;
  for (const Relation* input : inputs) {
    for (const auto& tuple : input->tuples) records.push_back({side, tuple});
    ++side;
  }
  return make_splits(std::move(records), split_size);
}

void check_conditions(const Schema& schema, const std::vector<Condition>& conditions) {
  for (const auto& condition : conditions)
    for (const auto& name : condition.attributes()) schema.require(name);
}

bool passes(const std::vector<Condition>& conditions, const Schema& schema, const Row& row) {
  for (const auto& condition : conditions)
    if (!evaluate(condition, schema, row)) return false;
  return true;
}

std::vector<std::size_t> columns_of(const Schema& schema, const std::vector<std::string>& attributes) {
  std::vector<std::size_t> columns;
  for (const auto& attribute : attributes) columns.push_back(schema.require(attribute));
  return columns;
}

Row restrict(const Row& row, const std::vector<std::size_t>& columns) {
  Row out;
  out.reserve(columns.size());
  for (auto c : columns) out.push_back(row[c]);
  return out;
}

void sort_tuples(std::vector<ProbTuple>& tuples) {
  std::stable_sort(tuples.begin(), tuples.end(),
                   [](const ProbTuple& a, const ProbTuple& b) { return a.values < b.values; });
}

Schema projected_schema(const Schema& schema, const std::vector<std::string>& attributes) {
  Schema out{schema.name, attributes};
  validate_schema(out);
  return out;
}

// Shared by projection and select-project: the mapper keeps tuples passing
// `conditions` and keys them by the projected values.
OpResult project_job(const Relation& r, const std::vector<Condition>& conditions,
                     const std::vector<std::string>& attributes, const OpOptions& options) {
  check_conditions(r.schema, conditions);
  Schema schema = projected_schema(r.schema, attributes);
  const auto columns = columns_of(r.schema, attributes);

  JobSpec<std::size_t, ProbTuple, Row, ProbTuple> spec;
  spec.num_reducers = options.num_reducers;
  spec.mapper = [&](const Record& record, const std::monostate&, auto& out) {
    if (!passes(conditions, r.schema, record.value.values)) return;
    ProbTuple tuple = record.value;
    tuple.values = restrict(record.value.values, columns);
    Row key = tuple.values;
    out.push_back({std::move(key), std::move(tuple)});
  };
  const bool lineage = options.track_lineage;
  spec.reducer = [lineage](const Row& key, std::span<const ProbTuple> values, const std::monostate&,
                           auto& out) {
    ProbTuple merged;
    merged.values = key;
    double absent = 1.0;
    for (const auto& value : values) {
      absent *= 1.0 - value.prob;
      if (lineage) merged.lineage = merged.lineage || value.lineage;
    }
    merged.prob = 1.0 - absent;
    out.push_back({key, std::move(merged)});
  };

  auto job = run_job(spec, splits_of({&r}, options.split_size), std::monostate{}, {options.workers});
  OpResult result{Relation{std::move(schema), {}}, std::move(job.counters)};
  for (auto& kv : job.flat()) result.relation.tuples.push_back(std::move(kv.value));
  sort_tuples(result.relation.tuples);
  return result;
}

struct JoinLayout {
  Schema schema;
  std::vector<std::size_t> left_key;
  std::vector<std::size_t> right_key;
  /// Right-side columns copied into the output after all left columns.
  std::vector<std::size_t> right_kept;
};

JoinLayout join_layout(const Schema& r, const Schema& s, const std::optional<std::vector<JoinOn>>& on) {
  std::vector<JoinOn> pairs;
  if (on) {
    pairs = *on;
  } else {
    for (const auto& attribute : r.attributes)
      if (s.has(attribute)) pairs.push_back({attribute, attribute});
  }
  JoinLayout layout;
  std::vector<bool> merged(s.attributes.size(), false);
  for (const auto& pair : pairs) {
    layout.left_key.push_back(r.require(pair.left));
    const auto right = s.require(pair.right);
    layout.right_key.push_back(right);
    if (pair.left == pair.right) merged[right] = true;
  }
  layout.schema.name = r.name.empty() || s.name.empty() ? std::string() : r.name + "_" + s.name;
  layout.schema.attributes = r.attributes;
  for (std::size_t i = 0; i < s.attributes.size(); ++i) {
    if (merged[i]) continue;
    if (r.has(s.attributes[i]))
      throw SchemaError("join would produce two attributes named '" + s.attributes[i] + "'");
    layout.schema.attributes.push_back(s.attributes[i]);
    layout.right_kept.push_back(i);
  }
  return layout;
}

using Tagged = std::pair<std::size_t, ProbTuple>;

OpResult join_job(const Relation& r, const Relation& s, const std::vector<Condition>& r_conditions,
                  const std::vector<Condition>& s_conditions, const std::optional<std::vector<JoinOn>>& on,
                  const OpOptions& options) {
  check_conditions(r.schema, r_conditions);
  check_conditions(s.schema, s_conditions);
  JoinLayout layout = join_layout(r.schema, s.schema, on);

  JobSpec<std::size_t, ProbTuple, Row, Tagged, Row, ProbTuple> spec;
  spec.num_reducers = options.num_reducers;
  spec.mapper = [&](const Record& record, const std::monostate&, auto& out) {
    const bool left = record.key == 0;
    if (!passes(left ? r_conditions : s_conditions, left ? r.schema : s.schema, record.value.values)) return;
    Row key = restrict(record.value.values, left ? layout.left_key : layout.right_key);
    out.push_back({std::move(key), Tagged{record.key, record.value}});
  };
  const bool lineage = options.track_lineage;
  spec.reducer = [&layout, lineage](const Row& key, std::span<const Tagged> values, const std::monostate&,
                                    auto& out) {
    for (const auto& [left_side, left] : values) {
      if (left_side != 0) continue;
      for (const auto& [right_side, right] : values) {
        if (right_side != 1) continue;
        ProbTuple joined;
        joined.values = left.values;
        for (auto c : layout.right_kept) joined.values.push_back(right.values[c]);
        joined.prob = left.prob * right.prob;
        if (lineage) joined.lineage = left.lineage && right.lineage;
        out.push_back({key, std::move(joined)});
      }
    }
  };

  auto job = run_job(spec, splits_of({&r, &s}, options.split_size), std::monostate{}, {options.workers});
  OpResult result{Relation{std::move(layout.schema), {}}, std::move(job.counters)};
  for (auto& kv : job.flat()) result.relation.tuples.push_back(std::move(kv.value));
  sort_tuples(result.relation.tuples);
  return result;
}

}  // namespace

OpResult op_select(const Relation& r, const std::vector<Condition>& conditions, const OpOptions& options) {
  check_conditions(r.schema, conditions);
  JobSpec<std::size_t, ProbTuple, std::size_t, ProbTuple> spec;
  spec.mapper = [&](const Record& record, const std::monostate&, auto& out) {
    if (passes(conditions, r.schema, record.value.values)) out.push_back(record);
  };
  auto job = run_job(spec, splits_of({&r}, options.split_size), std::monostate{}, {options.workers});
  OpResult result{Relation{r.schema, {}}, std::move(job.counters)};
  for (auto& kv : job.flat()) result.relation.tuples.push_back(std::move(kv.value));
  return result;
}

OpResult op_select(const Relation& r, const Condition& condition, const OpOptions& options) {
  return op_select(r, std::vector<Condition>{condition}, options);
}

OpResult op_project(const Relation& r, const std::vector<std::string>& attributes, const OpOptions& options) {
  return project_job(r, {}, attributes, options);
}

OpResult op_join(const Relation& r, const Relation& s, const std::optional<std::vector<JoinOn>>& on,
                 const OpOptions& options) {
  return join_job(r, s, {}, {}, on, options);
}

OpResult op_select_project(const Relation& r, const std::vector<Condition>& conditions,
                           const std::vector<std::string>& attributes, const OpOptions& options) {
  return project_job(r, conditions, attributes, options);
}

OpResult op_select_join(const Relation& r, const Relation& s, const std::vector<Condition>& r_conditions,
                        const std::vector<Condition>& s_conditions, const std::optional<std::vector<JoinOn>>& on,
                        const OpOptions& options) {
  return join_job(r, s, r_conditions, s_conditions, on, options);
}

Schema join_schema(const Schema& r, const Schema& s, const std::optional<std::vector<JoinOn>>& on) {
  return join_layout(r, s, on).schema;
}

}  // namespace mrlab
