#pragma once

// Split-level cache simulation for iterative jobs.
//
// Each node keeps an LRU cache of whole splits, bounded by a record count. A
// job-level directory maps every cached split to the nodes holding it and the
// scheduler uses it to send a task to a node that already has its input.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mrlab {

enum class SourceKind { LocalFile, Dfs, Database, Api };

std::string to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& text);

struct DataSource {
  std::string source_id;
  SourceKind kind = SourceKind::Dfs;
  double remote_cost_per_record = 1.0;
};

using SplitKey = std::pair<std::string, std::size_t>;

class NodeCache {
 public:
  NodeCache(int node_id, std::size_t capacity) : node_id_(node_id), capacity_(capacity) {}

  int node_id() const { return node_id_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t used() const { return used_; }
  bool contains(const SplitKey& split) const { return entries_.count(split) != 0; }
  std::vector<SplitKey> splits() const;

  /// Moves a cached split to the most recently used position.
  void touch(const SplitKey& split);
  /// Inserts a split, evicting least recently used ones until it fits.
  /// Returns the evicted splits. A split larger than the capacity is not cached.
  std::vector<SplitKey> insert(const SplitKey& split, std::size_t records);

 private:
  int node_id_;
  std::size_t capacity_;
  std::size_t used_ = 0;
  std::list<SplitKey> lru_;  // front is the most recently used
  std::map<SplitKey, std::pair<std::size_t, std::list<SplitKey>::iterator>> entries_;
};

class JobCacheDirectory {
 public:
  void add(const SplitKey& split, int node);
  void remove(const SplitKey& split, int node);
  std::set<int> nodes(const SplitKey& split) const;
  const std::map<SplitKey, std::set<int>>& entries() const { return entries_; }

 private:
  std::map<SplitKey, std::set<int>> entries_;
};

/// True iff the directory lists exactly the splits held by the node caches.
bool coherent(const JobCacheDirectory& directory, const std::vector<NodeCache>& caches);

/// Round-robin state for tasks with no usable cached copy.
struct RoundRobin {
  std::size_t next = 0;
};

/// Picks a free node that caches `split` (smallest id), else the next free
/// node in round-robin order over `all_nodes`.
int assign_task(const SplitKey& split, const JobCacheDirectory& directory, const std::set<int>& free_nodes,
                const std::vector<int>& all_nodes, RoundRobin& rr);

struct NodeSpec {
  int node_id = 0;
  std::size_t capacity_records = 0;
};

struct CacheJob {
  std::string source_id;
  std::size_t splits = 0;
  std::size_t iterations = 1;
  std::size_t records_per_split = 1;
};

enum class CachePolicy { On, Off };

struct Scenario {
  std::vector<NodeSpec> nodes;
  std::vector<DataSource> sources;
  std::vector<CacheJob> jobs;
};

Scenario read_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

struct IterationStats {
  std::size_t job = 0;
  std::string source_id;
  std::size_t iteration = 0;
  std::uint64_t remote_records = 0;
  double remote_cost = 0;
  std::size_t cache_hits = 0;
  std::size_t evictions = 0;
  /// Tasks whose split was cached only on nodes that were busy at the time.
  std::size_t locality_misses = 0;
};

struct SimReport {
  std::vector<IterationStats> iterations;
  /// Splits that never fit into any cache they were offered to.
  std::set<SplitKey> uncacheable;
  /// Cache contents at the end of every iteration, one entry per iteration.
  std::vector<std::set<SplitKey>> cached_after;

  std::vector<std::uint64_t> remote_records() const;
};

/// Runs the jobs in order. Throws std::invalid_argument on unknown sources,
/// duplicate ids or an empty cluster, and std::logic_error if the directory
/// ever disagrees with the node caches.
SimReport simulate_job_sequence(const Scenario& scenario, CachePolicy policy);

void write_sim_report_tsv(std::ostream& out, const SimReport& report);

}  // namespace mrlab
