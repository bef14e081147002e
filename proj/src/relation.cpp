#include "mrlab/relation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mrlab/errors.hpp"

namespace mrlab {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    fields.push_back(line.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::optional<std::size_t> Schema::index_of(const std::string& attribute) const {
  const auto it = std::find(attributes.begin(), attributes.end(), attribute);
  if (it == attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes.begin());
}

std::size_t Schema::require(const std::string& attribute) const {
  if (auto index = index_of(attribute)) return *index;
  throw SchemaError("unknown attribute '" + attribute + "' in " +
                    (name.empty() ? std::string("relation") : name));
}

void validate_schema(const Schema& schema) {
  std::set<std::string> seen;
  for (const auto& attribute : schema.attributes)
    if (!seen.insert(attribute).second)
      throw SchemaError("duplicate attribute '" + attribute + "' in " + schema.name);
}

Relation read_relation_tsv(std::istream& in, const std::string& name) {
  Relation relation;
  relation.schema.name = name;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("relation " + name + " has no header line");
  strip_cr(line);
  relation.schema.attributes = split_tabs(line);
  bool has_prob = false;
  if (!relation.schema.attributes.empty() && relation.schema.attributes.back() == "prob") {
    has_prob = true;
    relation.schema.attributes.pop_back();
  }
  validate_schema(relation.schema);
  const std::size_t width = relation.schema.attributes.size();

  std::size_t row = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != width + (has_prob ? 1 : 0))
      throw SchemaError(name + " row " + std::to_string(row + 1) + ": expected " +
                        std::to_string(width + (has_prob ? 1 : 0)) + " fields, got " +
                        std::to_string(fields.size()));
    ProbTuple tuple;
    for (std::size_t i = 0; i < width; ++i) tuple.values.push_back(parse_value(fields[i]));
    if (has_prob) {
      try {
        std::size_t used = 0;
        tuple.prob = std::stod(fields.back(), &used);
        if (used != fields.back().size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw SchemaError(name + " row " + std::to_string(row + 1) + ": bad probability '" +
                          fields.back() + "'");
      }
      if (!(tuple.prob >= 0.0 && tuple.prob <= 1.0))
        throw SchemaError(name + " row " + std::to_string(row + 1) + ": probability out of [0,1]");
    }
    ++row;
    tuple.lineage = ProvenanceFormula::literal(name + ":" + std::to_string(row));
    relation.tuples.push_back(std::move(tuple));
  }
  return relation;
}

Relation load_relation_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_relation_tsv(in, path.stem().string());
}

std::string format_prob(double p) {
  std::ostringstream out;
  out << std::setprecision(10) << p;
  return out.str();
}

void write_relation_tsv(std::ostream& out, const Relation& relation) {
  for (const auto& attribute : relation.schema.attributes) out << attribute << '\t';
  out << "prob\n";
  for (const auto& tuple : relation.tuples) {
    for (const auto& value : tuple.values) out << to_string(value) << '\t';
    out << format_prob(tuple.prob) << '\n';
  }
}

}  // namespace mrlab
