#pragma once

// Closed frequent itemset mining as a sequence of MapReduce jobs.
//
// Iteration i grows every generator found in iteration i-1 by one frequent
// item. Messages for the same grown generator meet in one reducer, which
// intersects the transactions (the closure) and sums the support. A closure
// is kept only when it is reached from its canonical parent: the generator
// minus its largest item, whose closure must already contain every closure
// item smaller than that largest item. Every closed set has exactly one such
// path, so no closure is produced twice.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mrlab/engine.hpp"

namespace mrlab {

using Item = std::string;
/// Sorted, duplicate-free.
using Itemset = std::vector<Item>;

Itemset make_itemset(std::vector<Item> items);
std::string to_string(const Itemset& items);  // comma-joined

struct Transaction {
  std::size_t tid = 0;
  Itemset items;
};

struct TransactionDB {
  std::vector<Transaction> transactions;
  std::size_t size() const { return transactions.size(); }
  Itemset items() const;
};

/// One transaction per line, whitespace-separated items; tid = line number.
TransactionDB read_transactions(std::istream& in);
TransactionDB load_transactions(const std::filesystem::path& path);

/// Transactions containing x; every tid for the empty set.
std::set<std::size_t> galois_g(const Itemset& x, const TransactionDB& db);
/// Items common to the transactions; every item of the database for no tids.
Itemset galois_f(const std::set<std::size_t>& tids, const TransactionDB& db);
Itemset closure_h(const Itemset& x, const TransactionDB& db);
std::size_t support(const Itemset& x, const TransactionDB& db);

struct ClosedItemset {
  Itemset closure;
  Itemset generator;
  std::size_t support = 0;
  friend bool operator==(const ClosedItemset&, const ClosedItemset&) = default;
};

struct GeneratorValue {
  Itemset partial_intersection;
  std::size_t count = 1;
  Item min_added_item;
  /// Closure of the canonical parent, when this message came from it.
  std::optional<Itemset> parent_closure;
};

using GeneratorMessage = KeyValue<Itemset, GeneratorValue>;

struct FrequentItems {
  std::map<Item, std::size_t> supports;
  CostCounters counters;
};

struct MiningOptions {
  std::size_t split_size = 2;
  std::size_t num_reducers = 2;
  unsigned workers = 1;
  bool use_combiner = true;
};

/// Word-count job over the items; keeps those with support >= min_support.
FrequentItems find_frequent_items(const TransactionDB& db, std::size_t min_support, const MiningOptions& options = {});

/// Messages of one transaction: every previous closure contained in it is
/// grown by each frequent item of the transaction outside the closure. A
/// generator reached several ways within one transaction is emitted once.
std::vector<GeneratorMessage> cfi_map(const Transaction& t, const std::vector<ClosedItemset>& previous,
                                      const std::set<Item>& frequent);

GeneratorValue cfi_combine(const Itemset& key, std::span<const GeneratorValue> values);

std::optional<ClosedItemset> cfi_reduce(const Itemset& key, std::span<const GeneratorValue> values,
                                        std::size_t min_support);

struct IterationReport {
  std::size_t iteration = 0;
  std::size_t closed_found = 0;
  CostCounters counters;
};

struct MiningResult {
  std::vector<ClosedItemset> closed;  // in discovery order
  FrequentItems frequent;
  std::vector<IterationReport> iterations;  // productive iterations only
};

MiningResult mine_cfi(const TransactionDB& db, std::size_t min_support, const MiningOptions& options = {});

/// All nonempty closed itemsets with support >= min_support, by exhaustive
/// enumeration. Throws LimitError above max_items distinct items.
std::vector<std::pair<Itemset, std::size_t>> brute_force_closed(const TransactionDB& db, std::size_t min_support,
                                                                std::size_t max_items = 20);

/// `n` or `p%` (rounded up) of the number of transactions.
std::size_t parse_min_support(const std::string& text, std::size_t transactions);

/// Rows `closure generator support`, by support descending then closure.
void write_cfi_tsv(std::ostream& out, std::vector<ClosedItemset> closed);

}  // namespace mrlab
