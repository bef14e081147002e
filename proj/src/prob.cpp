#include "mrlab/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrlab/errors.hpp"

namespace mrlab {

std::map<EventId, double> ProbDatabase::events() const {
  std::map<EventId, double> all;
  for (const auto& [name, relation] : relations)
    for (const auto& tuple : relation.tuples)
      for (const auto& event : tuple.lineage.variables()) all[event] = tuple.prob;
  return all;
}

std::vector<EventId> ProbDatabase::event_order() const {
  std::vector<EventId> order;
  for (const auto& [name, relation] : relations)
    for (const auto& tuple : relation.tuples)
      for (const auto& event : tuple.lineage.variables()) order.push_back(event);
  return order;
}

std::size_t ProbDatabase::tuple_count() const {
  std::size_t n = 0;
  for (const auto& [name, relation] : relations) n += relation.size();
  return n;
}

SchemaLookup ProbDatabase::lookup() const {
  return [this](const std::string& name) -> std::optional<std::vector<std::string>> {
    const auto it = relations.find(name);
    if (it == relations.end()) return std::nullopt;
    return it->second.schema.attributes;
  };
}

void ProbDatabase::add(Relation relation) {
  auto name = relation.schema.name;
  for (std::size_t row = 0; row < relation.tuples.size(); ++row)
    if (relation.tuples[row].lineage.is_false())
      relation.tuples[row].lineage = ProvenanceFormula::literal(name + ":" + std::to_string(row + 1));
  relations[name] = std::move(relation);
}

ProbDatabase load_database(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw SchemaError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  ProbDatabase db;
  for (const auto& file : files) db.add(load_relation_tsv(file));
  return db;
}

namespace {

struct BaseTuple {
  const ProbTuple* tuple;
  std::size_t bit;
};

// Tuples of the database in event_order, each with its bit position.
std::map<std::string, std::vector<BaseTuple>> indexed_tuples(const ProbDatabase& db) {
  std::map<std::string, std::vector<BaseTuple>> indexed;
  std::size_t bit = 0;
  for (const auto& [name, relation] : db.relations)
    for (const auto& tuple : relation.tuples) indexed[name].push_back({&tuple, bit++});
  return indexed;
}

std::vector<double> probabilities(const ProbDatabase& db) {
  std::vector<double> probs;
  for (const auto& [name, relation] : db.relations)
    for (const auto& tuple : relation.tuples) probs.push_back(tuple.prob);
  return probs;
}

void check_limit(const ProbDatabase& db, std::size_t max_tuples) {
  if (db.tuple_count() > max_tuples)
    throw LimitError("refusing to enumerate the worlds of " + std::to_string(db.tuple_count()) + " tuples",
                     max_tuples);
}

}  // namespace

void enumerate_worlds(const ProbDatabase& db, const std::function<void(const PossibleWorld&)>& fn,
                      std::size_t max_tuples) {
  check_limit(db, max_tuples);
  const auto order = db.event_order();
  const auto probs = probabilities(db);
  const std::size_t n = order.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    PossibleWorld world;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        world.present.insert(order[i]);
        world.prob *= probs[i];
      } else {
        world.prob *= 1.0 - probs[i];
      }
    }
    fn(world);
  }
}

Relation oracle_marginals(const ProbDatabase& db, const ConjunctiveQuery& q, std::size_t max_tuples) {
  check_limit(db, max_tuples);
  const auto indexed = indexed_tuples(db);
  const auto probs = probabilities(db);

  std::vector<const std::vector<BaseTuple>*> inputs;
  std::vector<const Schema*> schemas;
  for (const auto& ref : q.relations) {
    const auto it = db.relations.find(ref.name);
    if (it == db.relations.end()) throw SchemaError("database has no relation " + ref.name);
    static const std::vector<BaseTuple> empty;
    const auto found = indexed.find(ref.name);
    inputs.push_back(found == indexed.end() ? &empty : &found->second);
    schemas.push_back(&it->second.schema);
  }
  auto position = [&](const QualifiedAttr& attr) {
    for (std::size_t i = 0; i < q.relations.size(); ++i)
      if (q.relations[i].name == attr.relation) return std::pair{i, schemas[i]->require(attr.attribute)};
    throw SchemaError("query has no relation " + attr.relation);
  };

  // Every combination of one tuple per relation that satisfies the
  // predicates is a witness for its head values.
  std::map<Row, std::vector<std::uint64_t>> witnesses;
  std::map<Row, ProvenanceFormula> lineage;
  std::vector<std::size_t> choice(q.relations.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t depth) {
    if (depth == q.relations.size()) {
      auto value = [&](const QualifiedAttr& attr) -> const Value& {
        const auto [rel, col] = position(attr);
        return (*inputs[rel])[choice[rel]].tuple->values[col];
      };
      for (const auto& join : q.joins)
        if (value(join.left) != value(join.right)) return;
      for (const auto& sel : q.selections)
        if (value(sel.attr) != sel.constant) return;
      Row head;
      for (const auto& attr : q.head) head.push_back(value(attr));
      std::uint64_t mask = 0;
      ProvenanceFormula conjunct = ProvenanceFormula::truth();
      for (std::size_t r = 0; r < q.relations.size(); ++r) {
        const auto& base = (*inputs[r])[choice[r]];
        mask |= std::uint64_t{1} << base.bit;
        conjunct = conjunct && base.tuple->lineage;
      }
      witnesses[head].push_back(mask);
      lineage[head] = lineage[head] || conjunct;
      return;
    }
    for (choice[depth] = 0; choice[depth] < inputs[depth]->size(); ++choice[depth]) visit(depth + 1);
  };
  visit(0);

  // Head columns may repeat a column; keep the first occurrence of each.
  const auto names = column_names(q);
  std::vector<std::string> columns;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < q.head.size(); ++i) {
    const auto& name = names.at(q.head[i]);
    if (std::find(columns.begin(), columns.end(), name) != columns.end()) continue;
    columns.push_back(name);
    keep.push_back(i);
  }

  Relation result{Schema{"", columns}, {}};
  const std::size_t n = probs.size();
  std::vector<double> world_prob(std::size_t{1} << n, 1.0);
  for (std::uint64_t mask = 0; mask < world_prob.size(); ++mask)
    for (std::size_t i = 0; i < n; ++i) world_prob[mask] *= (mask >> i & 1) ? probs[i] : 1.0 - probs[i];

  for (const auto& [head, masks] : witnesses) {
    double total = 0.0;
    for (std::uint64_t world = 0; world < world_prob.size(); ++world) {
      for (auto mask : masks) {
        if ((world & mask) == mask) {
          total += world_prob[world];
          break;
        }
      }
    }
    ProbTuple tuple;
    for (auto i : keep) tuple.values.push_back(head[i]);
    tuple.prob = total;
    tuple.lineage = lineage.at(head);
    result.tuples.push_back(std::move(tuple));
  }
  sort_by_probability(result);
  return result;
}

Relation evaluate_scan(const ProbDatabase& db, const Plan& scan) {
  const PlanNode& node = *scan;
  if (node.kind != PlanNode::Kind::Scan) throw PlanError("not a scan");
  const auto it = db.relations.find(node.relation);
  if (it == db.relations.end()) throw PlanError("plan scans unknown relation " + node.relation);
  if (it->second.schema.attributes != node.base_attributes)
    throw PlanError("plan expects different attributes for relation " + node.relation);
  Relation relation = it->second;
  relation.schema.attributes = node.columns;
  return relation;
}

namespace {

OpResult evaluate(const ProbDatabase& db, const Plan& plan, const OpOptions& options) {
  switch (plan->kind) {
    case PlanNode::Kind::Scan:
      return {evaluate_scan(db, plan), {}};
    case PlanNode::Kind::Select: {
      auto child = evaluate(db, plan->left, options);
      auto out = op_select(child.relation, plan->condition, options);
      child.counters += out.counters;
      return {std::move(out.relation), std::move(child.counters)};
    }
    case PlanNode::Kind::Project: {
      auto child = evaluate(db, plan->left, options);
      auto out = op_project(child.relation, plan->columns, options);
      child.counters += out.counters;
      return {std::move(out.relation), std::move(child.counters)};
    }
    case PlanNode::Kind::Join: {
      auto left = evaluate(db, plan->left, options);
      auto right = evaluate(db, plan->right, options);
      auto out = op_join(left.relation, right.relation, std::nullopt, options);
      left.counters += right.counters;
      left.counters += out.counters;
      return {std::move(out.relation), std::move(left.counters)};
    }
  }
  throw PlanError("unknown plan node");
}

}  // namespace

PlanResult eval_plan_extensional(const ProbDatabase& db, const Plan& plan, const OpOptions& options) {
  auto out = evaluate(db, plan, options);
  return {std::move(out.relation), std::move(out.counters)};
}

PlanResult eval_plan_with_provenance(const ProbDatabase& db, const Plan& plan, const OpOptions& options) {
  OpOptions tracked = options;
  tracked.track_lineage = true;
  auto out = evaluate(db, plan, tracked);
  for (auto& tuple : out.relation.tuples) tuple.prob = std::numeric_limits<double>::quiet_NaN();
  return {std::move(out.relation), std::move(out.counters)};
}

namespace {

using Clauses = std::vector<std::vector<int>>;

// Shannon expansion on the variable occurring most often.
double shannon(Clauses clauses, const std::vector<double>& probs) {
  if (clauses.empty()) return 0.0;
  for (const auto& clause : clauses)
    if (clause.empty()) return 1.0;
  std::map<int, int> frequency;
  for (const auto& clause : clauses)
    for (int v : clause) ++frequency[v];
  const int pivot = std::max_element(frequency.begin(), frequency.end(), [](const auto& a, const auto& b) {
                      return a.second < b.second;
                    })->first;
  Clauses positive;
  Clauses negative;
  for (const auto& clause : clauses) {
    const auto it = std::find(clause.begin(), clause.end(), pivot);
    if (it == clause.end()) {
      positive.push_back(clause);
      negative.push_back(clause);
    } else {
      auto reduced = clause;
      reduced.erase(reduced.begin() + (it - clause.begin()));
      positive.push_back(std::move(reduced));
    }
  }
  const double p = probs[static_cast<std::size_t>(pivot)];
  return p * shannon(std::move(positive), probs) + (1.0 - p) * shannon(std::move(negative), probs);
}

}  // namespace

double formula_probability(const ProvenanceFormula& formula, const std::map<EventId, double>& events,
                           std::size_t max_variables) {
  const auto variables = formula.variables();
  if (variables.size() > max_variables)
    throw LimitError("formula has " + std::to_string(variables.size()) + " variables", max_variables);
  std::map<EventId, int> ids;
  std::vector<double> probs;
  for (const auto& variable : variables) {
    const auto it = events.find(variable);
    if (it == events.end()) throw std::out_of_range("unknown event " + variable);
    ids[variable] = static_cast<int>(probs.size());
    probs.push_back(it->second);
  }
  Clauses clauses;
  for (const auto& conjunct : formula.conjuncts()) {
    std::vector<int> clause;
    for (const auto& event : conjunct) clause.push_back(ids.at(event));
    clauses.push_back(std::move(clause));
  }
  return shannon(std::move(clauses), probs);
}

void apply_formula_probabilities(Relation& relation, const std::map<EventId, double>& events,
                                 std::size_t max_variables) {
  for (auto& tuple : relation.tuples) tuple.prob = formula_probability(tuple.lineage, events, max_variables);
}

std::map<Row, double> marginal_map(const Relation& relation) {
  std::map<Row, double> out;
  for (const auto& tuple : relation.tuples) out[tuple.values] = tuple.prob;
  return out;
}

Relation reorder_columns(const Relation& relation, const std::vector<std::string>& columns) {
  std::vector<std::size_t> index;
  for (const auto& column : columns) index.push_back(relation.schema.require(column));
  Relation out{Schema{relation.schema.name, columns}, {}};
  for (const auto& tuple : relation.tuples) {
    ProbTuple copy = tuple;
    copy.values.clear();
    for (auto i : index) copy.values.push_back(tuple.values[i]);
    out.tuples.push_back(std::move(copy));
  }
  return out;
}

void sort_by_probability(Relation& relation) {
  std::stable_sort(relation.tuples.begin(), relation.tuples.end(), [](const ProbTuple& a, const ProbTuple& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.values < b.values;
  });
}

}  // namespace mrlab
