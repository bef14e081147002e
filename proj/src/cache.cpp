#include "mrlab/cache.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mrlab {

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::LocalFile: return "local-file";
    case SourceKind::Dfs: return "dfs";
    case SourceKind::Database: return "database";
    case SourceKind::Api: return "api";
  }
  return "?";
}

SourceKind parse_source_kind(const std::string& text) {
  for (auto kind : {SourceKind::LocalFile, SourceKind::Dfs, SourceKind::Database, SourceKind::Api})
    if (to_string(kind) == text) return kind;
  throw std::invalid_argument("unknown source kind '" + text + "'");
}

std::vector<SplitKey> NodeCache::splits() const { return {lru_.begin(), lru_.end()}; }

void NodeCache::touch(const SplitKey& split) {
  auto it = entries_.find(split);
  if (it == entries_.end()) return;
  lru_.splice(lru_.begin(), lru_, it->second.second);
}

std::vector<SplitKey> NodeCache::insert(const SplitKey& split, std::size_t records) {
  std::vector<SplitKey> evicted;
  if (records > capacity_) return evicted;
  if (contains(split)) {
    touch(split);
    return evicted;
  }
  while (used_ + records > capacity_) {
    const SplitKey victim = lru_.back();
    used_ -= entries_.at(victim).first;
    entries_.erase(victim);
    lru_.pop_back();
    evicted.push_back(victim);
  }
  lru_.push_front(split);
  entries_[split] = {records, lru_.begin()};
  used_ += records;
  return evicted;
}

void JobCacheDirectory::add(const SplitKey& split, int node) { entries_[split].insert(node); }

void JobCacheDirectory::remove(const SplitKey& split, int node) {
  auto it = entries_.find(split);
  if (it == entries_.end()) return;
  it->second.erase(node);
  if (it->second.empty()) entries_.erase(it);
}

std::set<int> JobCacheDirectory::nodes(const SplitKey& split) const {
  auto it = entries_.find(split);
  return it == entries_.end() ? std::set<int>{} : it->second;
}

bool coherent(const JobCacheDirectory& directory, const std::vector<NodeCache>& caches) {
  std::map<SplitKey, std::set<int>> actual;
  for (const auto& cache : caches) {
    for (const auto& split : cache.splits()) actual[split].insert(cache.node_id());
    if (cache.used() > cache.capacity()) return false;
  }
  return actual == directory.entries();
}

int assign_task(const SplitKey& split, const JobCacheDirectory& directory, const std::set<int>& free_nodes,
                const std::vector<int>& all_nodes, RoundRobin& rr) {
  if (free_nodes.empty()) throw std::invalid_argument("no free node");
  for (int node : directory.nodes(split))
    if (free_nodes.count(node)) return node;
  for (std::size_t step = 0; step < all_nodes.size(); ++step) {
    const std::size_t i = (rr.next + step) % all_nodes.size();
    if (free_nodes.count(all_nodes[i])) {
      rr.next = (i + 1) % all_nodes.size();
      return all_nodes[i];
    }
  }
  throw std::invalid_argument("free node not in cluster");
}

Scenario read_scenario(std::istream& in) {
  Scenario scenario;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    auto fail = [&] { return std::invalid_argument("scenario line " + std::to_string(line_no) + ": bad '" + kind + "' entry"); };
    if (kind == "node") {
      NodeSpec node;
      long long capacity = -1;
      if (!(fields >> node.node_id >> capacity) || capacity < 0) throw fail();
      node.capacity_records = static_cast<std::size_t>(capacity);
      scenario.nodes.push_back(node);
    } else if (kind == "source") {
      DataSource source;
      std::string source_kind;
      if (!(fields >> source.source_id >> source_kind >> source.remote_cost_per_record) ||
          source.remote_cost_per_record < 0)
        throw fail();
      source.kind = parse_source_kind(source_kind);
      scenario.sources.push_back(source);
    } else if (kind == "job") {
      CacheJob job;
      long long splits = -1, iterations = -1, records = 1;
      if (!(fields >> job.source_id >> splits >> iterations) || splits < 0 || iterations < 1) throw fail();
      if (fields >> records) {
        if (records < 1) throw fail();
      } else if (!fields.eof()) {
        throw fail();
      }
      job.splits = static_cast<std::size_t>(splits);
      job.iterations = static_cast<std::size_t>(iterations);
      job.records_per_split = static_cast<std::size_t>(records);
      scenario.jobs.push_back(job);
    } else {
      throw std::invalid_argument("scenario line " + std::to_string(line_no) + ": unknown entry '" + kind + "'");
    }
    std::string extra;
    if (fields >> extra) throw fail();
  }
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_scenario(in);
}

std::vector<std::uint64_t> SimReport::remote_records() const {
  std::vector<std::uint64_t> out;
  for (const auto& it : iterations) out.push_back(it.remote_records);
  return out;
}

SimReport simulate_job_sequence(const Scenario& scenario, CachePolicy policy) {
  if (scenario.nodes.empty()) throw std::invalid_argument("cluster has no nodes");
  std::vector<NodeCache> caches;
  std::vector<int> node_ids;
  for (const auto& node : scenario.nodes) node_ids.push_back(node.node_id);
  std::sort(node_ids.begin(), node_ids.end());
  if (std::adjacent_find(node_ids.begin(), node_ids.end()) != node_ids.end())
    throw std::invalid_argument("duplicate node id");
  for (int id : node_ids) {
    auto spec = std::find_if(scenario.nodes.begin(), scenario.nodes.end(), [id](const NodeSpec& n) { return n.node_id == id; });
    caches.emplace_back(id, spec->capacity_records);
  }
  auto cache_of = [&](int id) -> NodeCache& {
    return caches[static_cast<std::size_t>(std::lower_bound(node_ids.begin(), node_ids.end(), id) - node_ids.begin())];
  };

  std::map<std::string, DataSource> sources;
  for (const auto& source : scenario.sources)
    if (!sources.emplace(source.source_id, source).second)
      throw std::invalid_argument("duplicate source '" + source.source_id + "'");

  JobCacheDirectory directory;
  RoundRobin rr;
  SimReport report;
  std::set<SplitKey> ever_cached;
  auto check = [&] {
    if (!coherent(directory, caches)) throw std::logic_error("cache directory out of sync with node caches");
  };

  for (std::size_t j = 0; j < scenario.jobs.size(); ++j) {
    const CacheJob& job = scenario.jobs[j];
    auto source = sources.find(job.source_id);
    if (source == sources.end()) throw std::invalid_argument("unknown source '" + job.source_id + "'");
    for (std::size_t iteration = 1; iteration <= job.iterations; ++iteration) {
      IterationStats stats;
      stats.job = j + 1;
      stats.source_id = job.source_id;
      stats.iteration = iteration;

      std::set<int> free_nodes;
      for (std::size_t s = 0; s < job.splits; ++s) {
        if (free_nodes.empty()) free_nodes.insert(node_ids.begin(), node_ids.end());
        const SplitKey split{job.source_id, s};
        const bool use_cache = policy == CachePolicy::On;
        const int node = use_cache ? assign_task(split, directory, free_nodes, node_ids, rr)
                                   : assign_task(split, JobCacheDirectory{}, free_nodes, node_ids, rr);
        free_nodes.erase(node);
        NodeCache& cache = cache_of(node);

        if (use_cache && cache.contains(split)) {
          cache.touch(split);
          ++stats.cache_hits;
          continue;
        }
        if (use_cache && !directory.nodes(split).empty()) ++stats.locality_misses;
        stats.remote_records += job.records_per_split;
        stats.remote_cost += static_cast<double>(job.records_per_split) * source->second.remote_cost_per_record;
        if (!use_cache) continue;
        if (job.records_per_split > cache.capacity()) {
          report.uncacheable.insert(split);
          continue;
        }
        for (const auto& victim : cache.insert(split, job.records_per_split)) {
          directory.remove(victim, node);
          ++stats.evictions;
        }
        directory.add(split, node);
        ever_cached.insert(split);
        check();
      }
      check();
      report.iterations.push_back(stats);
      std::set<SplitKey> cached;
      for (const auto& [split, holders] : directory.entries()) cached.insert(split);
      report.cached_after.push_back(std::move(cached));
    }
  }
  // A split that fit somewhere after all is not reported.
  for (const auto& split : ever_cached) report.uncacheable.erase(split);
  return report;
}

void write_sim_report_tsv(std::ostream& out, const SimReport& report) {
  out << "job\tsource\titeration\tremote_records\tremote_cost\tcache_hits\tevictions\tlocality_misses\n";
  for (const auto& it : report.iterations)
    out << it.job << '\t' << it.source_id << '\t' << it.iteration << '\t' << it.remote_records << '\t'
        << it.remote_cost << '\t' << it.cache_hits << '\t' << it.evictions << '\t' << it.locality_misses << '\n';
}

}  // namespace mrlab
