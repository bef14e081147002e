#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "mrlab/plan.hpp"
#include "mrlab/value.hpp"

namespace mrlab {

/// `Rel.attr`, or the existence event `Rel.E` of a relation's tuples.
struct QualifiedAttr {
  std::string relation;
  std::string attribute;
  bool event = false;

  static QualifiedAttr event_of(const std::string& relation) { return {relation, "", true}; }
  std::string to_string() const { return relation + "." + (event ? std::string("E") : attribute); }

  friend auto operator<=>(const QualifiedAttr&, const QualifiedAttr&) = default;
};

struct RelationRef {
  std::string name;
  std::vector<std::string> attributes;
  friend bool operator==(const RelationRef&, const RelationRef&) = default;
};

struct JoinPredicate {
  QualifiedAttr left;
  QualifiedAttr right;
  friend bool operator==(const JoinPredicate&, const JoinPredicate&) = default;
};

struct SelectionPredicate {
  QualifiedAttr attr;
  Value constant;
  friend bool operator==(const SelectionPredicate&, const SelectionPredicate&) = default;
};

/// SELECT DISTINCT head FROM relations WHERE joins AND selections.
struct ConjunctiveQuery {
  std::vector<RelationRef> relations;
  std::vector<QualifiedAttr> head;
  std::vector<JoinPredicate> joins;
  std::vector<SelectionPredicate> selections;
  bool distinct = true;

  const RelationRef* find(const std::string& relation) const;
  /// Every attribute of every relation, in declaration order.
  std::vector<QualifiedAttr> attributes() const;

  friend bool operator==(const ConjunctiveQuery&, const ConjunctiveQuery&) = default;
};

/// Parses `SELECT [DISTINCT] a [AS 'x'], ... FROM R [AS] r, ... [WHERE p AND ...]`
/// where each predicate is `attr = attr` or `attr = constant`. Attributes may
/// be qualified by relation name or alias. Throws ParseError with the offset.
ConjunctiveQuery parse_query(const std::string& text, const SchemaLookup& lookup);

std::string to_sql(const ConjunctiveQuery& q);

/// Plan column for every attribute of the query. Attributes equated by join
/// predicates share a column. A column is named by the bare attribute name
/// when that is unambiguous, otherwise `Rel.attr` of its first member.
std::map<QualifiedAttr, std::string> column_names(const ConjunctiveQuery& q);

/// Distinct head columns in head order.
std::vector<std::string> head_columns(const ConjunctiveQuery& q);

/// Scan of one relation of the query, renamed to query columns, with its
/// constant selections applied.
Plan query_leaf(const ConjunctiveQuery& q, const std::string& relation);

/// Naive plan: left-deep join in declaration order, selections at the
/// leaves, projection onto the head columns on top (omitted if a no-op).
Plan canonical_plan(const ConjunctiveQuery& q);

}  // namespace mrlab
