#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrlab/lineage.hpp"
#include "mrlab/value.hpp"

namespace mrlab {

struct Schema {
  std::string name;
  std::vector<std::string> attributes;

  std::optional<std::size_t> index_of(const std::string& attribute) const;
  /// Throws SchemaError when the attribute is absent.
  std::size_t require(const std::string& attribute) const;
  bool has(const std::string& attribute) const { return index_of(attribute).has_value(); }

  friend bool operator==(const Schema&, const Schema&) = default;
};

/// Throws SchemaError on duplicate attribute names.
void validate_schema(const Schema& schema);

struct ProbTuple {
  Row values;
  double prob = 1.0;
  /// Provenance of the tuple; base tuples carry one literal.
  ProvenanceFormula lineage;
};

struct Relation {
  Schema schema;
  std::vector<ProbTuple> tuples;

  std::size_t size() const { return tuples.size(); }
};

/// Reads a relation. The first line names the attributes; a trailing column
/// called `prob` holds tuple probabilities (default 1). Row i gets the event
/// `<name>:i`.
Relation read_relation_tsv(std::istream& in, const std::string& name);
Relation load_relation_tsv(const std::filesystem::path& path);

/// Writes attributes then `prob`, probabilities with up to 10 significant digits.
void write_relation_tsv(std::ostream& out, const Relation& relation);

std::string format_prob(double p);

}  // namespace mrlab
