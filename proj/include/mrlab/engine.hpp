#pragma once

// In-process MapReduce executor.
//
// A job runs one map task per split, an optional per-task combiner, a hash
// partitioner and one reduce task per partition. Every task reads only its own
// input and the read-only shared context, so tasks can be scheduled on any
// number of worker threads without changing the output or the counters.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "mrlab/errors.hpp"

namespace mrlab {

template <class K, class V>
struct KeyValue {
  K key;
  V value;

  friend bool operator==(const KeyValue&, const KeyValue&) = default;
};

template <class K, class V>
struct Split {
  std::size_t split_id = 0;
  std::vector<KeyValue<K, V>> records;
};

/// Per-task input record counts. The communication cost of a job is the sum
/// of the inputs of all its tasks, map and reduce alike.
struct CostCounters {
  std::vector<std::uint64_t> map_input_records;
  std::vector<std::uint64_t> reduce_input_records;

  std::uint64_t map_total() const {
    return std::accumulate(map_input_records.begin(), map_input_records.end(), std::uint64_t{0});
  }
  std::uint64_t reduce_total() const {
    return std::accumulate(reduce_input_records.begin(), reduce_input_records.end(),
                           std::uint64_t{0});
  }
  std::uint64_t total() const { return map_total() + reduce_total(); }

  /// Appends the tasks of another job (plans are sequences of jobs).
  CostCounters& operator+=(const CostCounters& other) {
    map_input_records.insert(map_input_records.end(), other.map_input_records.begin(),
                             other.map_input_records.end());
    reduce_input_records.insert(reduce_input_records.end(), other.reduce_input_records.begin(),
                                other.reduce_input_records.end());
    return *this;
  }

  friend bool operator==(const CostCounters&, const CostCounters&) = default;
};

/// Cuts `records` into ceil(n / split_size) consecutive splits.
template <class K, class V>
std::vector<Split<K, V>> make_splits(std::vector<KeyValue<K, V>> records, std::size_t split_size) {
  if (split_size == 0) throw std::invalid_argument("split_size must be at least 1");
  std::vector<Split<K, V>> splits;
  splits.reserve((records.size() + split_size - 1) / split_size);
  for (std::size_t begin = 0; begin < records.size(); begin += split_size) {
    const std::size_t end = std::min(records.size(), begin + split_size);
    Split<K, V> split;
    split.split_id = splits.size();
    split.records.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(begin)),
                         std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(end)));
    splits.push_back(std::move(split));
  }
  return splits;
}

// ---------------------------------------------------------------------------
// Stable key hashing. The partitioner is FNV-1a (64 bit) over a canonical byte
// encoding of the key, so partition assignment never depends on the platform
// or on std::hash.

namespace detail {

template <class T>
struct is_vector : std::false_type {};
template <class T, class A>
struct is_vector<std::vector<T, A>> : std::true_type {};

template <class T>
struct is_pair : std::false_type {};
template <class A, class B>
struct is_pair<std::pair<A, B>> : std::true_type {};

template <class T>
struct is_variant : std::false_type {};
template <class... Ts>
struct is_variant<std::variant<Ts...>> : std::true_type {};

template <class>
inline constexpr bool always_false = false;

inline void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

}  // namespace detail

template <class T>
void encode_key(std::string& out, const T& key) {
  if constexpr (std::is_same_v<T, std::monostate>) {
    out.push_back('\0');
  } else if constexpr (std::is_integral_v<T>) {
    detail::append_u64(out, static_cast<std::uint64_t>(key));
  } else if constexpr (std::is_same_v<T, std::string>) {
    detail::append_u64(out, key.size());
    out += key;
  } else if constexpr (detail::is_vector<T>::value) {
    detail::append_u64(out, key.size());
    for (const auto& element : key) encode_key(out, element);
  } else if constexpr (detail::is_pair<T>::value) {
    encode_key(out, key.first);
    encode_key(out, key.second);
  } else if constexpr (detail::is_variant<T>::value) {
    out.push_back(static_cast<char>(key.index()));
    std::visit([&out](const auto& alternative) { encode_key(out, alternative); }, key);
  } else {
    static_assert(detail::always_false<T>, "no key encoding for this type");
  }
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

template <class K>
std::uint64_t stable_hash(const K& key) {
  std::string bytes;
  encode_key(bytes, key);
  return fnv1a64(bytes);
}

// ---------------------------------------------------------------------------

/// Description of one job. An empty `combiner` disables combining; an empty
/// `reducer` makes the job map-only, in which case the map output is the job
/// output and no reduce tasks are counted.
template <class KI, class VI, class KM, class VM, class KO = KM, class VO = VM,
          class Context = std::monostate>
struct JobSpec {
  using InputRecord = KeyValue<KI, VI>;
  using MapOutput = std::vector<KeyValue<KM, VM>>;
  using ReduceOutput = std::vector<KeyValue<KO, VO>>;

  std::function<void(const InputRecord&, const Context&, MapOutput&)> mapper;
  std::function<void(const KM&, std::span<const VM>, MapOutput&)> combiner;
  std::function<void(const KM&, std::span<const VM>, const Context&, ReduceOutput&)> reducer;
  std::size_t num_reducers = 1;
  /// Strict weak order on intermediate keys; empty means operator<.
  std::function<bool(const KM&, const KM&)> key_less;
};

struct RunOptions {
  unsigned workers = 1;
};

template <class KO, class VO>
struct JobResult {
  /// One list per reducer, each sorted by key.
  std::vector<std::vector<KeyValue<KO, VO>>> output;
  CostCounters counters;

  std::vector<KeyValue<KO, VO>> flat() const {
    std::vector<KeyValue<KO, VO>> all;
    for (const auto& part : output) all.insert(all.end(), part.begin(), part.end());
    return all;
  }
};

namespace detail {

/// Runs fn(0..n-1) on up to `workers` threads. If any task throws, the
/// exception of the lowest failing index is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run_one = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t count = std::min<std::size_t>(workers, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    }
    for (auto& thread : pool) thread.join();
  }
  for (auto& error : errors)
    if (error) std::rethrow_exception(error);
}

inline std::string describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

/// Sorts records by key (stably) and calls fn(key, values) once per distinct key.
template <class K, class V, class Less, class Fn>
void for_each_group(std::vector<KeyValue<K, V>>& records, const Less& less, Fn&& fn) {
  std::stable_sort(records.begin(), records.end(),
                   [&](const auto& a, const auto& b) { return less(a.key, b.key); });
  std::vector<V> values;
  for (std::size_t begin = 0; begin < records.size();) {
    std::size_t end = begin + 1;
    while (end < records.size() && !less(records[begin].key, records[end].key)) ++end;
    values.clear();
    for (std::size_t i = begin; i < end; ++i) values.push_back(std::move(records[i].value));
    fn(records[begin].key, std::span<const V>(values));
    begin = end;
  }
}

}  // namespace detail

/// Executes one job over `splits` with `context` shared read-only by all tasks.
/// Output and counters are identical for every `options.workers` value.
template <class KI, class VI, class KM, class VM, class KO, class VO, class Context>
JobResult<KO, VO> run_job(const JobSpec<KI, VI, KM, VM, KO, VO, Context>& spec,
                          const std::vector<Split<KI, VI>>& splits, const Context& context,
                          const RunOptions& options = {}) {
  using MapOutput = std::vector<KeyValue<KM, VM>>;
  if (!spec.mapper) throw std::invalid_argument("job has no mapper");
  if (spec.num_reducers == 0) throw std::invalid_argument("num_reducers must be at least 1");

  auto less = [&spec](const KM& a, const KM& b) { return spec.key_less ? spec.key_less(a, b) : a < b; };

  JobResult<KO, VO> result;
  result.counters.map_input_records.resize(splits.size());

  std::vector<MapOutput> map_outputs(splits.size());
  detail::parallel_for(splits.size(), options.workers, [&](std::size_t task) {
    const auto& split = splits[task];
    try {
      MapOutput emitted;
      for (const auto& record : split.records) spec.mapper(record, context, emitted);
      if (spec.combiner) {
        MapOutput combined;
        detail::for_each_group(emitted, less, [&](const KM& key, std::span<const VM> values) {
          spec.combiner(key, values, combined);
        });
        emitted = std::move(combined);
      }
      map_outputs[task] = std::move(emitted);
    } catch (const std::exception& e) {
      throw TaskError("map-" + std::to_string(split.split_id), e.what());
    }
    result.counters.map_input_records[task] = split.records.size();
  });

  if (!spec.reducer) {
    if constexpr (std::is_same_v<KM, KO> && std::is_same_v<VM, VO>) {
      result.output.resize(1);
      for (auto& part : map_outputs)
        result.output[0].insert(result.output[0].end(), std::make_move_iterator(part.begin()),
                                std::make_move_iterator(part.end()));
      return result;
    } else {
      throw std::invalid_argument("map-only job requires map output type == job output type");
    }
  }

  // Shuffle: route each record to hash(key) mod R, preserving map-task order.
  std::vector<MapOutput> partitions(spec.num_reducers);
  for (auto& part : map_outputs) {
    for (auto& record : part) {
      const auto r = static_cast<std::size_t>(stable_hash(record.key) % spec.num_reducers);
      partitions[r].push_back(std::move(record));
    }
  }

  result.output.resize(spec.num_reducers);
  result.counters.reduce_input_records.resize(spec.num_reducers);
  for (std::size_t r = 0; r < spec.num_reducers; ++r)
    result.counters.reduce_input_records[r] = partitions[r].size();

  detail::parallel_for(spec.num_reducers, options.workers, [&](std::size_t r) {
    try {
      detail::for_each_group(partitions[r], less, [&](const KM& key, std::span<const VM> values) {
        spec.reducer(key, values, context, result.output[r]);
      });
    } catch (const std::exception& e) {
      throw TaskError("reduce-" + std::to_string(r), e.what());
    }
  });
  return result;
}

}  // namespace mrlab
