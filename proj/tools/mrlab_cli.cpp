// mrlab command-line front end. Reports go to stdout as TSV, diagnostics to
// stderr. Exit codes: 0 success, 1 input error, 2 no safe plan.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrlab/cache.hpp"
#include "mrlab/catalog.hpp"
#include "mrlab/cfi.hpp"
#include "mrlab/errors.hpp"
#include "mrlab/optimizer.hpp"
#include "mrlab/prob.hpp"
#include "mrlab/query.hpp"
#include "mrlab/safety.hpp"

namespace fs = std::filesystem;
using namespace mrlab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Catalog database_catalog(const fs::path& dir, const ProbDatabase& db) {
  const fs::path file = dir / "catalog.txt";
  if (fs::exists(file)) return load_catalog(file);
  return Catalog::compute(db.relations);
}

void write_counters(const CostCounters& counters) {
  std::cout << "\nmap_input\treduce_input\ttotal\n"
            << counters.map_total() << '\t' << counters.reduce_total() << '\t' << counters.total() << '\n';
}

struct QueryArgs {
  std::string db = ".";
  std::string mode = "safe";
  std::string plan;
  std::string query;
  std::string query_file;
  std::size_t max_worlds = 20;
  bool optimize = false;
};

std::optional<ConjunctiveQuery> load_query(const QueryArgs& args, const ProbDatabase& db) {
  if (!args.query.empty()) return parse_query(args.query, db.lookup());
  if (!args.query_file.empty()) return parse_query(read_file(args.query_file), db.lookup());
  return std::nullopt;
}

ConjunctiveQuery require_query(const QueryArgs& args, const ProbDatabase& db) {
  auto q = load_query(args, db);
  if (!q) throw std::invalid_argument("this mode needs --query or --query-file");
  return *q;
}

Plan chosen_plan(const QueryArgs& args, const ProbDatabase& db) {
  if (!args.plan.empty()) {
    auto text = builtin_plan_text(args.plan);
    return parse_plan(text ? *text : read_file(args.plan), db.lookup());
  }
  return canonical_plan(require_query(args, db));
}

int run_query(const QueryArgs& args) {
  const ProbDatabase db = load_database(args.db);
  if (args.mode == "oracle") {
    write_relation_tsv(std::cout, oracle_marginals(db, require_query(args, db), args.max_worlds));
    return 0;
  }
  if (args.mode == "safe") {
    const auto q = require_query(args, db);
    const Catalog catalog = database_catalog(args.db, db);
    PlanResult result;
    if (args.optimize) {
      const BestPlan best = find_best_plan(q, catalog);
      std::cerr << "plan: " << serialize(best.logical) << '\n';
      result = execute_physical(db, best.logical, best.physical);
    } else {
      auto plan = safe_plan(q, base_fds(q, catalog.fds()));
      if (!plan) throw NoSafePlanError();
      std::cerr << "plan: " << serialize(*plan) << '\n';
      result = eval_plan_extensional(db, *plan);
    }
    result.relation = reorder_columns(result.relation, head_columns(q));
    sort_by_probability(result.relation);
    write_relation_tsv(std::cout, result.relation);
    write_counters(result.counters);
    return 0;
  }
  const Plan plan = chosen_plan(args, db);
  std::cerr << "plan: " << serialize(plan) << '\n';
  if (args.mode == "unsafe") {
    if (!plan_is_safe(plan, database_catalog(args.db, db).fds()))
      std::cerr << "warning: plan failed the safety test; probabilities may be wrong\n";
    auto result = eval_plan_extensional(db, plan);
    sort_by_probability(result.relation);
    write_relation_tsv(std::cout, result.relation);
    write_counters(result.counters);
    return 0;
  }
  if (args.mode == "provenance") {
    auto result = eval_plan_with_provenance(db, plan);
    apply_formula_probabilities(result.relation, db.events());
    sort_by_probability(result.relation);
    for (const auto& attribute : result.relation.schema.attributes) std::cout << attribute << '\t';
    std::cout << "prob\tlineage\n";
    for (const auto& tuple : result.relation.tuples) {
      for (const auto& value : tuple.values) std::cout << to_string(value) << '\t';
      std::cout << format_prob(tuple.prob) << '\t' << tuple.lineage.to_string() << '\n';
    }
    write_counters(result.counters);
    return 0;
  }
  throw std::invalid_argument("unknown mode '" + args.mode + "'");
}

int run_plan(const QueryArgs& args) {
  const ProbDatabase db = load_database(args.db);
  const auto q = require_query(args, db);
  const BestPlan best = find_best_plan(q, database_catalog(args.db, db));
  std::cout << "safe_plan\t" << serialize(best.initial) << '\n'
            << "safe_plan_cost\t" << best.initial_cost << '\n'
            << "best_plan\t" << serialize(best.logical) << '\n'
            << "best_plan_cost\t" << best.cost << '\n';
  for (const auto& job : best.physical.jobs) std::cout << "job\t" << job.to_string() << '\n';
  if (best.truncated) std::cerr << "note: equivalent-plan search stopped at its bound\n";
  return 0;
}

int run_worlds(const QueryArgs& args) {
  const ProbDatabase db = load_database(args.db);
  std::cout << "world\tprob\tpresent\n";
  std::size_t index = 0;
  enumerate_worlds(
      db,
      [&](const PossibleWorld& world) {
        std::string present;
        for (const auto& event : world.present) present += (present.empty() ? "" : ",") + event;
        std::cout << index++ << '\t' << format_prob(world.prob) << '\t' << present << '\n';
      },
      args.max_worlds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MapReduce lab: closed itemsets, probabilistic queries, cache simulation"};
  app.require_subcommand(1);

  std::string transactions, min_sup;
  MiningOptions mining;
  auto* mine = app.add_subcommand("mine", "Mine closed frequent itemsets");
  mine->add_option("--transactions", transactions, "one transaction per line, items separated by spaces")
      ->required()
      ->check(CLI::ExistingFile);
  mine->add_option("--min-sup", min_sup, "absolute count or percentage such as 40%")->required();
  mine->add_option("--split-size", mining.split_size, "transactions per map task");
  mine->add_option("--reducers", mining.num_reducers, "number of reduce tasks");
  mine->add_option("--workers", mining.workers, "worker threads");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Evaluate a query over a probabilistic database");
  query->add_option("--db", qa.db, "directory of TSV relations")->required()->check(CLI::ExistingDirectory);
  query->add_option("--mode", qa.mode, "safe, unsafe, provenance or oracle")
      ->check(CLI::IsMember({"safe", "unsafe", "provenance", "oracle"}));
  query->add_option("--plan", qa.plan, "plan file or builtin name (P1, P2)");
  query->add_option("--query", qa.query, "query text");
  query->add_option("--query-file", qa.query_file, "file holding the query")->check(CLI::ExistingFile);
  query->add_option("--max-worlds", qa.max_worlds, "largest tuple count the oracle enumerates");
  query->add_flag("--optimize", qa.optimize, "safe mode: run the cheapest equivalent safe plan");

  QueryArgs pa;
  auto* plan = app.add_subcommand("plan", "Print the safe plan, the optimized plan and its jobs");
  plan->add_option("--db", pa.db, "directory of TSV relations and catalog.txt")->required()->check(CLI::ExistingDirectory);
  plan->add_option("--query", pa.query, "query text");
  plan->add_option("--query-file", pa.query_file, "file holding the query")->check(CLI::ExistingFile);

  QueryArgs wa;
  auto* worlds = app.add_subcommand("worlds", "List the possible worlds of a database");
  worlds->add_option("--db", wa.db, "directory of TSV relations")->required()->check(CLI::ExistingDirectory);
  worlds->add_option("--max-worlds", wa.max_worlds, "largest tuple count to enumerate");

  std::string scenario, policy = "on";
  auto* cache = app.add_subcommand("simulate-cache", "Simulate the split cache over iterative jobs");
  cache->add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  cache->add_option("--policy", policy, "on or off")->check(CLI::IsMember({"on", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*mine) {
      const TransactionDB db = load_transactions(transactions);
      const auto result = mine_cfi(db, parse_min_support(min_sup, db.size()), mining);
      write_cfi_tsv(std::cout, result.closed);
      std::cout << "\niteration\tclosed\tmap_input\treduce_input\ttotal\n";
      for (const auto& it : result.iterations)
        std::cout << it.iteration << '\t' << it.closed_found << '\t' << it.counters.map_total() << '\t'
                  << it.counters.reduce_total() << '\t' << it.counters.total() << '\n';
      return 0;
    }
    if (*query) return run_query(qa);
    if (*plan) return run_plan(pa);
    if (*worlds) return run_worlds(wa);
    if (*cache) {
      const auto report =
          simulate_job_sequence(load_scenario(scenario), policy == "on" ? CachePolicy::On : CachePolicy::Off);
      write_sim_report_tsv(std::cout, report);
      for (const auto& [source, split] : report.uncacheable)
        std::cerr << "split " << source << ':' << split << " is larger than every cache it met\n";
      return 0;
    }
  } catch (const NoSafePlanError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
