#include "mrlab/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mrlab/errors.hpp"

namespace mrlab {

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  if (text == "-") return parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ','))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

double parse_count(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size() && value >= 0) return value;
  } catch (const std::exception&) {
  }
  throw SchemaError("catalog line " + std::to_string(line) + ": bad count '" + text + "'");
}

}  // namespace

void Catalog::set_rows(const std::string& relation, double rows) { rows_[relation] = rows; }

void Catalog::set_distinct(const std::string& relation, std::vector<std::string> attributes,
                           double count) {
  std::sort(attributes.begin(), attributes.end());
  distinct_[relation][std::move(attributes)] = count;
}

bool Catalog::has_rows(const std::string& relation) const { return rows_.count(relation) > 0; }

double Catalog::rows(const std::string& relation) const {
  const auto it = rows_.find(relation);
  if (it == rows_.end()) throw CatalogMissError("no T statistic for relation " + relation);
  return it->second;
}

const std::map<std::vector<std::string>, double>& Catalog::distinct(const std::string& relation) const {
  static const std::map<std::vector<std::string>, double> none;
  const auto it = distinct_.find(relation);
  return it == distinct_.end() ? none : it->second;
}

Catalog Catalog::compute(const std::map<std::string, Relation>& relations) {
  Catalog catalog;
  for (const auto& [name, relation] : relations) {
    catalog.set_rows(name, static_cast<double>(relation.size()));
    const std::size_t width = relation.schema.attributes.size();
    if (width > 12) throw LimitError("too many attributes to enumerate in " + name, 12);
    for (std::size_t mask = 1; mask < (std::size_t{1} << width); ++mask) {
      std::vector<std::string> attributes;
      std::vector<std::size_t> columns;
      for (std::size_t i = 0; i < width; ++i)
        if (mask & (std::size_t{1} << i)) {
          attributes.push_back(relation.schema.attributes[i]);
          columns.push_back(i);
        }
      std::set<Row> seen;
      for (const auto& tuple : relation.tuples) {
        Row key;
        for (auto c : columns) key.push_back(tuple.values[c]);
        seen.insert(std::move(key));
      }
      catalog.set_distinct(name, attributes, static_cast<double>(seen.size()));
    }
  }
  return catalog;
}

Catalog read_catalog(std::istream& in) {
  Catalog catalog;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens[0] == "T" && tokens.size() == 3) {
      catalog.set_rows(tokens[1], parse_count(tokens[2], number));
    } else if (tokens[0] == "V" && tokens.size() == 4) {
      catalog.set_distinct(tokens[1], split_commas(tokens[2]), parse_count(tokens[3], number));
    } else if (tokens[0] == "FD" && tokens.size() == 4) {
      catalog.fds().push_back({tokens[1], split_commas(tokens[2]), split_commas(tokens[3])});
    } else {
      throw SchemaError("catalog line " + std::to_string(number) + ": cannot parse '" + line + "'");
    }
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_catalog(in);
}

}  // namespace mrlab
