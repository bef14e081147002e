#include "mrlab/lineage.hpp"

#include <algorithm>

namespace mrlab {

ProvenanceFormula::ProvenanceFormula(std::vector<Conjunct> conjuncts)
    : conjuncts_(std::move(conjuncts)) {
  normalize();
}

ProvenanceFormula ProvenanceFormula::literal(EventId event) {
  return ProvenanceFormula({Conjunct{std::move(event)}});
}

ProvenanceFormula ProvenanceFormula::truth() { return ProvenanceFormula({Conjunct{}}); }

void ProvenanceFormula::normalize() {
  for (auto& conjunct : conjuncts_) {
    std::sort(conjunct.begin(), conjunct.end());
    conjunct.erase(std::unique(conjunct.begin(), conjunct.end()), conjunct.end());
  }
  std::sort(conjuncts_.begin(), conjuncts_.end());
  conjuncts_.erase(std::unique(conjuncts_.begin(), conjuncts_.end()), conjuncts_.end());
}

std::set<EventId> ProvenanceFormula::variables() const {
  std::set<EventId> vars;
  for (const auto& conjunct : conjuncts_) vars.insert(conjunct.begin(), conjunct.end());
  return vars;
}

std::string ProvenanceFormula::to_string() const {
  if (conjuncts_.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < conjuncts_.size(); ++i) {
    if (i) out += " | ";
    if (conjuncts_[i].empty()) {
      out += "true";
      continue;
    }
    out += '(';
    for (std::size_t j = 0; j < conjuncts_[i].size(); ++j) {
      if (j) out += " & ";
      out += conjuncts_[i][j];
    }
    out += ')';
  }
  return out;
}

ProvenanceFormula operator&&(const ProvenanceFormula& a, const ProvenanceFormula& b) {
  std::vector<ProvenanceFormula::Conjunct> product;
  product.reserve(a.conjuncts_.size() * b.conjuncts_.size());
  for (const auto& x : a.conjuncts_) {
    for (const auto& y : b.conjuncts_) {
      ProvenanceFormula::Conjunct both = x;
      both.insert(both.end(), y.begin(), y.end());
      product.push_back(std::move(both));
    }
  }
  return ProvenanceFormula(std::move(product));
}

ProvenanceFormula operator||(const ProvenanceFormula& a, const ProvenanceFormula& b) {
  auto all = a.conjuncts_;
  all.insert(all.end(), b.conjuncts_.begin(), b.conjuncts_.end());
  return ProvenanceFormula(std::move(all));
}

}  // namespace mrlab
