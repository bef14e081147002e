#include "mrlab/cfi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mrlab/errors.hpp"

namespace mrlab {

Itemset make_itemset(std::vector<Item> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::string to_string(const Itemset& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

Itemset TransactionDB::items() const {
  std::set<Item> all;
  for (const auto& t : transactions) all.insert(t.items.begin(), t.items.end());
  return Itemset(all.begin(), all.end());
}

TransactionDB read_transactions(std::istream& in) {
  TransactionDB db;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tokens(line);
    std::vector<Item> items{std::istream_iterator<std::string>(tokens), std::istream_iterator<std::string>()};
    db.transactions.push_back({db.transactions.size() + 1, make_itemset(std::move(items))});
  }
  return db;
}

TransactionDB load_transactions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_transactions(in);
}

namespace {

bool subset(const Itemset& small, const Itemset& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

Itemset intersect(const Itemset& a, const Itemset& b) {
  Itemset out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Itemset difference(const Itemset& a, const Itemset& b) {
  Itemset out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::set<std::size_t> galois_g(const Itemset& x, const TransactionDB& db) {
  std::set<std::size_t> tids;
  for (const auto& t : db.transactions)
    if (subset(x, t.items)) tids.insert(t.tid);
  return tids;
}

Itemset galois_f(const std::set<std::size_t>& tids, const TransactionDB& db) {
  if (tids.empty()) return db.items();
  std::optional<Itemset> common;
  for (const auto& t : db.transactions) {
    if (!tids.count(t.tid)) continue;
    common = common ? intersect(*common, t.items) : t.items;
  }
  return common.value_or(Itemset{});
}

Itemset closure_h(const Itemset& x, const TransactionDB& db) { return galois_f(galois_g(x, db), db); }

std::size_t support(const Itemset& x, const TransactionDB& db) { return galois_g(x, db).size(); }

FrequentItems find_frequent_items(const TransactionDB& db, std::size_t min_support, const MiningOptions& options) {
  JobSpec<std::size_t, Itemset, Item, std::size_t> spec;
  spec.num_reducers = options.num_reducers;
  spec.mapper = [](const KeyValue<std::size_t, Itemset>& record, const std::monostate&, auto& out) {
    for (const auto& item : record.value) out.push_back({item, 1});
  };
  auto sum = [](std::span<const std::size_t> counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    return total;
  };
  if (options.use_combiner)
    spec.combiner = [sum](const Item& item, std::span<const std::size_t> counts, auto& out) {
      out.push_back({item, sum(counts)});
    };
  spec.reducer = [sum, min_support](const Item& item, std::span<const std::size_t> counts, const std::monostate&,
                                    auto& out) {
    const auto total = sum(counts);
    if (total >= min_support) out.push_back({item, total});
  };

  std::vector<KeyValue<std::size_t, Itemset>> records;
  for (const auto& t : db.transactions) records.push_back({t.tid, t.items});
  auto job = run_job(spec, make_splits(std::move(records), options.split_size), std::monostate{}, {options.workers});
  FrequentItems out;
  for (const auto& kv : job.flat()) out.supports[kv.key] = kv.value;
  out.counters = std::move(job.counters);
  return out;
}

std::vector<GeneratorMessage> cfi_map(const Transaction& t, const std::vector<ClosedItemset>& previous,
                                      const std::set<Item>& frequent) {
  std::map<Itemset, GeneratorValue> grown;
  for (const auto& c : previous) {
    if (!subset(c.closure, t.items)) continue;
    for (const auto& item : difference(t.items, c.closure)) {
      if (!frequent.count(item)) continue;
      Itemset key = c.generator;
      key.insert(std::upper_bound(key.begin(), key.end(), item), item);
      const bool canonical = key.back() == item;
      auto [it, fresh] = grown.try_emplace(key);
      GeneratorValue& value = it->second;
      if (fresh) {
        value.partial_intersection = t.items;
        value.count = 1;
        value.min_added_item = item;
      } else {
        value.min_added_item = std::min(value.min_added_item, item);
      }
      if (canonical) value.parent_closure = c.closure;
    }
  }
  std::vector<GeneratorMessage> out;
  for (auto& [key, value] : grown) out.push_back({key, std::move(value)});
  return out;
}

GeneratorValue cfi_combine(const Itemset&, std::span<const GeneratorValue> values) {
  GeneratorValue out = values.front();
  for (const auto& value : values.subspan(1)) {
    out.partial_intersection = intersect(out.partial_intersection, value.partial_intersection);
    out.count += value.count;
    out.min_added_item = std::min(out.min_added_item, value.min_added_item);
    if (!out.parent_closure) out.parent_closure = value.parent_closure;
  }
  return out;
}

std::optional<ClosedItemset> cfi_reduce(const Itemset& key, std::span<const GeneratorValue> values,
                                        std::size_t min_support) {
  const GeneratorValue merged = cfi_combine(key, values);
  if (merged.count < min_support) return std::nullopt;
  if (!merged.parent_closure) return std::nullopt;
  const Itemset& closure = merged.partial_intersection;
  for (const auto& item : difference(closure, *merged.parent_closure))
    if (item < key.back()) return std::nullopt;
  return ClosedItemset{closure, key, merged.count};
}

namespace {

struct IterationContext {
  const std::vector<ClosedItemset>* previous = nullptr;
  std::set<Item> frequent;
  std::size_t min_support = 1;
};

}  // namespace

MiningResult mine_cfi(const TransactionDB& db, std::size_t min_support, const MiningOptions& options) {
  if (min_support == 0) throw std::invalid_argument("minimum support must be at least 1");
  MiningResult result;
  result.frequent = find_frequent_items(db, min_support, options);

  IterationContext context;
  for (const auto& [item, count] : result.frequent.supports) context.frequent.insert(item);
  context.min_support = min_support;

  JobSpec<std::size_t, Itemset, Itemset, GeneratorValue, Itemset, ClosedItemset, IterationContext> spec;
  spec.num_reducers = options.num_reducers;
  spec.mapper = [](const KeyValue<std::size_t, Itemset>& record, const IterationContext& ctx, auto& out) {
    auto messages = cfi_map(Transaction{record.key, record.value}, *ctx.previous, ctx.frequent);
    out.insert(out.end(), std::make_move_iterator(messages.begin()), std::make_move_iterator(messages.end()));
  };
  if (options.use_combiner)
    spec.combiner = [](const Itemset& key, std::span<const GeneratorValue> values, auto& out) {
      out.push_back({key, cfi_combine(key, values)});
    };
  spec.reducer = [](const Itemset& key, std::span<const GeneratorValue> values, const IterationContext& ctx,
                    auto& out) {
    if (auto closed = cfi_reduce(key, values, ctx.min_support)) out.push_back({key, std::move(*closed)});
  };

  std::vector<KeyValue<std::size_t, Itemset>> records;
  for (const auto& t : db.transactions) records.push_back({t.tid, t.items});
  const auto splits = make_splits(std::move(records), options.split_size);

  std::vector<ClosedItemset> previous{ClosedItemset{}};
  for (std::size_t iteration = 1;; ++iteration) {
    context.previous = &previous;
    auto job = run_job(spec, splits, context, {options.workers});
    std::vector<ClosedItemset> current;
    for (auto& kv : job.flat()) current.push_back(std::move(kv.value));
    std::sort(current.begin(), current.end(),
              [](const ClosedItemset& a, const ClosedItemset& b) { return a.generator < b.generator; });
    if (current.empty()) break;
    result.iterations.push_back({iteration, current.size(), std::move(job.counters)});
    result.closed.insert(result.closed.end(), current.begin(), current.end());
    previous = std::move(current);
  }
  return result;
}

std::vector<std::pair<Itemset, std::size_t>> brute_force_closed(const TransactionDB& db, std::size_t min_support,
                                                                std::size_t max_items) {
  const Itemset items = db.items();
  if (items.size() > max_items)
    throw LimitError("refusing to enumerate subsets of " + std::to_string(items.size()) + " items", max_items);
  std::vector<std::uint32_t> masks;
  for (const auto& t : db.transactions) {
    std::uint32_t mask = 0;
    for (const auto& item : t.items)
      mask |= 1u << (std::lower_bound(items.begin(), items.end(), item) - items.begin());
    masks.push_back(mask);
  }
  std::vector<std::pair<Itemset, std::size_t>> out;
  for (std::uint32_t x = 1; x < (1u << items.size()); ++x) {
    std::size_t count = 0;
    std::uint32_t common = ~0u;
    for (auto mask : masks) {
      if ((mask & x) != x) continue;
      ++count;
      common &= mask;
    }
    if (count < std::max<std::size_t>(min_support, 1) || common != x) continue;
    Itemset set;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (x >> i & 1u) set.push_back(items[i]);
    out.push_back({std::move(set), count});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t parse_min_support(const std::string& text, std::size_t transactions) {
  if (text.empty()) throw std::invalid_argument("empty minimum support");
  std::size_t used = 0;
  if (text.back() == '%') {
    const std::string number = text.substr(0, text.size() - 1);
    double percent = 0;
    try {
      percent = std::stod(number, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != number.size() || !(percent > 0) || percent > 100)
      throw std::invalid_argument("bad minimum support '" + text + "'");
    const auto count = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(transactions) - 1e-9));
    return std::max<std::size_t>(count, 1);
  }
  long long count = 0;
  try {
    count = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != text.size() || count < 1) throw std::invalid_argument("bad minimum support '" + text + "'");
  return static_cast<std::size_t>(count);
}

void write_cfi_tsv(std::ostream& out, std::vector<ClosedItemset> closed) {
  std::sort(closed.begin(), closed.end(), [](const ClosedItemset& a, const ClosedItemset& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.closure < b.closure;
  });
  out << "closure\tgenerator\tsupport\n";
  for (const auto& c : closed) out << to_string(c.closure) << '\t' << to_string(c.generator) << '\t' << c.support << '\n';
}

}  // namespace mrlab
