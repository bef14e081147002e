#pragma once

#include <set>
#include <string>
#include <vector>

namespace mrlab {

/// Identifier of a base tuple's existence event, `<relation>:<1-based row>`.
using EventId = std::string;

/// Monotone DNF over event literals. Conjuncts are sorted and unique; the
/// formula with no conjuncts is false and the one with a single empty conjunct
/// is true.
class ProvenanceFormula {
 public:
  using Conjunct = std::vector<EventId>;

  ProvenanceFormula() = default;
  explicit ProvenanceFormula(std::vector<Conjunct> conjuncts);

  static ProvenanceFormula literal(EventId event);
  static ProvenanceFormula truth();

  const std::vector<Conjunct>& conjuncts() const { return conjuncts_; }
  bool is_false() const { return conjuncts_.empty(); }
  std::set<EventId> variables() const;

  /// `(a & b) | (c)`; false prints as `false`, true as `true`.
  std::string to_string() const;

  friend ProvenanceFormula operator&&(const ProvenanceFormula& a, const ProvenanceFormula& b);
  friend ProvenanceFormula operator||(const ProvenanceFormula& a, const ProvenanceFormula& b);
  friend bool operator==(const ProvenanceFormula&, const ProvenanceFormula&) = default;

 private:
  void normalize();
  std::vector<Conjunct> conjuncts_;
};

}  // namespace mrlab
