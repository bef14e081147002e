#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mrlab/catalog.hpp"
#include "mrlab/ops.hpp"
#include "mrlab/plan.hpp"
#include "mrlab/query.hpp"

namespace mrlab {

/// Tuple-independent probabilistic database.
struct ProbDatabase {
  std::map<std::string, Relation> relations;

  /// Event of every base tuple with its probability.
  std::map<EventId, double> events() const;
  /// Events in relation-name, row order.
  std::vector<EventId> event_order() const;
  std::size_t tuple_count() const;
  SchemaLookup lookup() const;
  /// Tuples without an event get "<relation>:<row>", rows counted from 1.
  void add(Relation relation);
};

/// Loads every `*.tsv` file of the directory as a relation named by its stem.
ProbDatabase load_database(const std::filesystem::path& dir);

struct PossibleWorld {
  std::set<EventId> present;
  double prob = 1.0;
};

/// Calls fn on all 2^n worlds. Throws LimitError if n > max_tuples.
void enumerate_worlds(const ProbDatabase& db, const std::function<void(const PossibleWorld&)>& fn,
                      std::size_t max_tuples = 20);

/// Exact answer probabilities by summing, for every possible world, the
/// worlds whose deterministic answer contains the tuple. Columns are the
/// query's head columns; tuples are sorted by probability, highest first,
/// and carry their witness DNF as lineage.
Relation oracle_marginals(const ProbDatabase& db, const ConjunctiveQuery& q, std::size_t max_tuples = 20);

struct PlanResult {
  Relation relation;
  CostCounters counters;
};

/// The relation a Scan node reads, renamed to the scan's columns.
Relation evaluate_scan(const ProbDatabase& db, const Plan& scan);

/// Runs the plan operator by operator with extensional probabilities.
PlanResult eval_plan_extensional(const ProbDatabase& db, const Plan& plan, const OpOptions& options = {});

/// Same evaluation, keeping only the provenance of every result tuple; the
/// probabilities of the result are NaN.
PlanResult eval_plan_with_provenance(const ProbDatabase& db, const Plan& plan, const OpOptions& options = {});

/// Exact probability of a monotone DNF by Shannon expansion over its
/// variables. Throws LimitError above max_variables and std::out_of_range for
/// an unknown event.
double formula_probability(const ProvenanceFormula& formula, const std::map<EventId, double>& events,
                           std::size_t max_variables = 24);

/// Replaces each tuple's probability by the exact probability of its lineage.
void apply_formula_probabilities(Relation& relation, const std::map<EventId, double>& events,
                                 std::size_t max_variables = 24);

/// Tuple values to probability.
std::map<Row, double> marginal_map(const Relation& relation);

/// Columns of `relation` reordered to `columns`.
Relation reorder_columns(const Relation& relation, const std::vector<std::string>& columns);

void sort_by_probability(Relation& relation);

}  // namespace mrlab
