#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mrlab/relation.hpp"

namespace mrlab {

/// A functional dependency declared for one base relation, by attribute name.
struct BaseFd {
  std::string relation;
  std::vector<std::string> lhs;
  std::vector<std::string> rhs;

  friend bool operator==(const BaseFd&, const BaseFd&) = default;
};

/// Table statistics: T(R) and V(R, attribute list). Attribute lists are
/// order-insensitive.
class Catalog {
 public:
  void set_rows(const std::string& relation, double rows);
  void set_distinct(const std::string& relation, std::vector<std::string> attributes, double count);

  bool has_rows(const std::string& relation) const;
  /// Throws CatalogMissError.
  double rows(const std::string& relation) const;
  /// Every V statistic of the relation, keyed by sorted attribute list.
  const std::map<std::vector<std::string>, double>& distinct(const std::string& relation) const;

  std::vector<BaseFd>& fds() { return fds_; }
  const std::vector<BaseFd>& fds() const { return fds_; }

  /// Exact T and V (for every nonempty attribute subset) of the given relations.
  static Catalog compute(const std::map<std::string, Relation>& relations);

 private:
  std::map<std::string, double> rows_;
  std::map<std::string, std::map<std::vector<std::string>, double>> distinct_;
  std::vector<BaseFd> fds_;
};

/// Lines `T <rel> <n>`, `V <rel> <a[,b...]> <n>`, `FD <rel> <lhs,..> <rhs,..>`;
/// fields separated by tabs or spaces, `-` is an empty list, `#` starts a comment.
Catalog read_catalog(std::istream& in);
Catalog load_catalog(const std::filesystem::path& path);

}  // namespace mrlab
