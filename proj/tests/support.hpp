#pragma once

// Independent reference implementations used by the tests. Nothing here calls
// the library code it is compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mrlab/catalog.hpp"
#include "mrlab/prob.hpp"
#include "mrlab/query.hpp"
#include "mrlab/safety.hpp"

namespace testing {

using mrlab::Row;
using mrlab::Value;

inline std::string data_dir() { return MRLAB_DATA_DIR; }

inline mrlab::ProbDatabase example_db() { return mrlab::load_database(data_dir() + "/example"); }

inline const char* q_e_text() {
  return "SELECT DISTINCT e.did AS 'Dept ID', e.rid AS 'Rank ID' FROM Emp AS e, Dept AS d, Rank AS r "
         "WHERE e.did = d.did AND e.rid = r.rid";
}

inline mrlab::ConjunctiveQuery q_e(const mrlab::ProbDatabase& db) { return mrlab::parse_query(q_e_text(), db.lookup()); }

inline std::map<Row, double> as_map(const mrlab::Relation& r) {
  std::map<Row, double> out;
  for (const auto& t : r.tuples) out[t.values] += t.prob;
  return out;
}

inline bool close_maps(const std::map<Row, double>& a, const std::map<Row, double>& b, double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  for (const auto& [row, p] : a) {
    auto it = b.find(row);
    if (it == b.end() || std::fabs(it->second - p) > tol) return false;
  }
  return true;
}

/// Answer probabilities by enumerating every subset of base tuples and running
/// the query as nested loops over the present tuples.
inline std::map<Row, double> world_oracle(const mrlab::ProbDatabase& db, const mrlab::ConjunctiveQuery& q) {
  struct Tuple {
    std::size_t rel;
    const mrlab::ProbTuple* t;
  };
  std::vector<Tuple> all;
  std::vector<const mrlab::Relation*> rels;
  for (const auto& ref : q.relations) rels.push_back(&db.relations.at(ref.name));
  for (std::size_t r = 0; r < rels.size(); ++r)
    for (const auto& t : rels[r]->tuples) all.push_back({r, &t});
  if (all.size() > 22) throw std::runtime_error("world_oracle: too many tuples");

  auto rel_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < q.relations.size(); ++i)
      if (q.relations[i].name == name) return i;
    throw std::runtime_error("unknown relation " + name);
  };
  auto value_of = [&](const std::vector<const Row*>& pick, const mrlab::QualifiedAttr& a) -> const Value& {
    const std::size_t r = rel_index(a.relation);
    const auto& attrs = rels[r]->schema.attributes;
    const auto col = static_cast<std::size_t>(std::find(attrs.begin(), attrs.end(), a.attribute) - attrs.begin());
    return (*pick[r])[col];
  };

  std::map<Row, double> answer;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size()); ++mask) {
    double p = 1.0;
    std::vector<std::vector<const Row*>> present(rels.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      const bool in = (mask >> i) & 1u;
      p *= in ? all[i].t->prob : 1.0 - all[i].t->prob;
      if (in) present[all[i].rel].push_back(&all[i].t->values);
    }
    std::set<Row> heads;
    std::vector<const Row*> pick(rels.size());
    auto search = [&](auto&& self, std::size_t r) -> void {
      if (r == rels.size()) {
        for (const auto& j : q.joins)
          if (value_of(pick, j.left) != value_of(pick, j.right)) return;
        for (const auto& s : q.selections)
          if (value_of(pick, s.attr) != s.constant) return;
        Row head;
        for (const auto& h : q.head) head.push_back(value_of(pick, h));
        heads.insert(head);
        return;
      }
      for (const Row* row : present[r]) {
        pick[r] = row;
        self(self, r + 1);
      }
    };
    search(search, 0);
    for (const auto& h : heads) answer[h] += p;
  }
  return answer;
}

/// Probability of a monotone DNF by summing over all assignments.
inline double truth_table_probability(const std::vector<std::vector<std::string>>& dnf,
                                      const std::map<std::string, double>& probs) {
  std::vector<std::string> vars;
  for (const auto& c : dnf) vars.insert(vars.end(), c.begin(), c.end());
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  double total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << vars.size()); ++mask) {
    auto on = [&](const std::string& v) {
      return (mask >> (std::lower_bound(vars.begin(), vars.end(), v) - vars.begin())) & 1u;
    };
    bool sat = false;
    for (const auto& c : dnf) sat = sat || std::all_of(c.begin(), c.end(), on);
    if (!sat) continue;
    double p = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) p *= (mask >> i & 1u) ? probs.at(vars[i]) : 1 - probs.at(vars[i]);
    total += p;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Random instances.

struct RandomSchema {
  std::map<std::string, std::vector<std::string>> relations;
};

/// Up to three relations over a small pool of attribute names, so that shared
/// names give join predicates.
inline RandomSchema random_schema(std::mt19937_64& rng, std::size_t max_relations = 3) {
  static const std::vector<std::string> pool{"x", "y", "z", "w"};
  static const std::vector<std::string> names{"R", "S", "T", "U"};
  RandomSchema schema;
  const std::size_t n = 1 + rng() % max_relations;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> attrs = pool;
    std::shuffle(attrs.begin(), attrs.end(), rng);
    attrs.resize(1 + rng() % 2);
    std::sort(attrs.begin(), attrs.end());
    schema.relations[names[i]] = attrs;
  }
  return schema;
}

inline mrlab::ProbDatabase random_db(std::mt19937_64& rng, const RandomSchema& schema, std::size_t max_rows = 3,
                                     int domain = 2) {
  mrlab::ProbDatabase db;
  for (const auto& [name, attrs] : schema.relations) {
    mrlab::Relation r;
    r.schema = {name, attrs};
    std::set<Row> seen;
    const std::size_t rows = 1 + rng() % max_rows;
    for (std::size_t i = 0; i < rows; ++i) {
      Row row;
      for (std::size_t a = 0; a < attrs.size(); ++a) row.push_back(std::int64_t(1 + rng() % domain));
      if (!seen.insert(row).second) continue;
      mrlab::ProbTuple t;
      t.values = row;
      t.prob = double(1 + rng() % 9) / 10.0;
      t.lineage = mrlab::ProvenanceFormula::literal(name + ":" + std::to_string(r.tuples.size() + 1));
      r.tuples.push_back(t);
    }
    db.add(std::move(r));
  }
  return db;
}

/// SQL text for a random conjunctive query over the schema: every pair of
/// relations sharing an attribute name is joined on it, the head is a random
/// nonempty subset of attributes and there may be one constant selection.
inline std::string random_query_text(std::mt19937_64& rng, const RandomSchema& schema) {
  std::vector<std::string> quals;
  std::vector<std::string> joins;
  std::vector<std::pair<std::string, std::vector<std::string>>> rels(schema.relations.begin(),
                                                                      schema.relations.end());
  std::set<std::string> heads_seen;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    for (const auto& a : rels[i].second) quals.push_back(rels[i].first + "." + a);
    for (std::size_t j = 0; j < i; ++j)
      for (const auto& a : rels[i].second)
        if (std::count(rels[j].second.begin(), rels[j].second.end(), a))
          joins.push_back(rels[j].first + "." + a + " = " + rels[i].first + "." + a);
  }
  std::vector<std::string> head;
  std::set<std::string> names;
  for (const auto& qa : quals) {
    const std::string bare = qa.substr(qa.find('.') + 1);
    if (rng() % 2 && names.insert(bare).second) head.push_back(qa);
  }
  if (head.empty()) head.push_back(quals[rng() % quals.size()]);
  if (rng() % 4 == 0) joins.push_back(quals[rng() % quals.size()] + " = " + std::to_string(1 + rng() % 2));

  std::string sql = "SELECT DISTINCT ";
  for (std::size_t i = 0; i < head.size(); ++i) sql += (i ? ", " : "") + head[i];
  sql += " FROM ";
  for (std::size_t i = 0; i < rels.size(); ++i) sql += (i ? ", " : "") + rels[i].first;
  for (std::size_t i = 0; i < joins.size(); ++i) sql += (i ? " AND " : " WHERE ") + joins[i];
  return sql;
}

/// Catalog with rows and distinct counts for every nonempty attribute subset.
inline mrlab::Catalog random_catalog(std::mt19937_64& rng, const RandomSchema& schema) {
  mrlab::Catalog catalog;
  for (const auto& [name, attrs] : schema.relations) {
    const double rows = double(1 + rng() % 5000);
    catalog.set_rows(name, rows);
    std::vector<double> single;
    for (std::size_t i = 0; i < attrs.size(); ++i) single.push_back(double(1 + rng() % std::uint64_t(rows)));
    for (std::uint32_t mask = 1; mask < (1u << attrs.size()); ++mask) {
      std::vector<std::string> subset;
      double v = 1, lo = 1;
      for (std::size_t i = 0; i < attrs.size(); ++i)
        if (mask >> i & 1u) {
          subset.push_back(attrs[i]);
          v *= single[i];
          lo = std::max(lo, single[i]);
        }
      catalog.set_distinct(name, subset, std::max(lo, std::min(v, rows)));
    }
  }
  return catalog;
}

// ---------------------------------------------------------------------------
// Random safe plans for the optimizer checks.

using mrlab::Condition;
using mrlab::Plan;

inline Condition eq(std::string attr, std::int64_t v) { return {std::move(attr), mrlab::CompareOp::Eq, Value{v}}; }

inline Plan rebuild(const Plan& node, Plan left, Plan right) {
  switch (node->kind) {
    case mrlab::PlanNode::Kind::Scan: return node;
    case mrlab::PlanNode::Kind::Select: return mrlab::make_select(node->condition, std::move(left));
    case mrlab::PlanNode::Kind::Project: return mrlab::make_project(node->columns, std::move(left));
    case mrlab::PlanNode::Kind::Join: return mrlab::make_join(std::move(left), std::move(right));
  }
  return node;
}

inline std::size_t node_count(const Plan& p) { return p ? 1 + node_count(p->left) + node_count(p->right) : 0; }

/// Wraps the `target`-th node (pre-order) having `column` in a selection.
inline Plan insert_select(const Plan& p, const Condition& cond, std::size_t& target) {
  if (!p) return p;
  const bool here = std::count(p->columns.begin(), p->columns.end(), cond.lhs) && target-- == 0;
  Plan left = insert_select(p->left, cond, target);
  Plan right = insert_select(p->right, cond, target);
  Plan out = rebuild(p, left, right);
  return here ? mrlab::make_select(cond, out) : out;
}

// Sum over selections of the size of their subtree. Pushing one selection
// down shrinks its own subtree and leaves every other one unchanged.
inline std::size_t select_weight(const Plan& p) {
  if (!p) return 0;
  return (p->kind == mrlab::PlanNode::Kind::Select ? node_count(p) : 0) + select_weight(p->left) +
         select_weight(p->right);
}

struct RandomCase {
  RandomSchema schema;
  mrlab::ProbDatabase db;
  mrlab::ConjunctiveQuery q;
  mrlab::Catalog catalog;
  Plan plan;  // safe, possibly with selections placed high
};

inline std::optional<RandomCase> random_case(std::mt19937_64& rng) {
  RandomCase c;
  c.schema = random_schema(rng, 4);
  c.db = random_db(rng, c.schema, 3, 2);
  c.q = mrlab::parse_query(random_query_text(rng, c.schema), c.db.lookup());
  c.catalog = random_catalog(rng, c.schema);
  auto plan = mrlab::safe_plan(c.q);
  if (!plan) return std::nullopt;
  c.plan = *plan;
  for (std::size_t k = rng() % 3; k-- > 0;) {
    const auto& cols = c.plan->columns;
    const Condition cond = eq(cols[rng() % cols.size()], std::int64_t(1 + rng() % 2));
    std::size_t target = rng() % node_count(c.plan);
    c.plan = insert_select(c.plan, cond, target);
  }
  return c;
}

}  // namespace testing
