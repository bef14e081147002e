// Acceptance checks AC1-AC9. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "mrlab/cache.hpp"
#include "mrlab/cfi.hpp"
#include "mrlab/optimizer.hpp"
#include "mrlab/rewrite.hpp"
#include "mrlab/safety.hpp"
#include "support.hpp"

using namespace mrlab;

namespace {

constexpr double kProbTolerance = 1e-9;
constexpr double kCostRelTolerance = 1e-9;
constexpr double kGoldenSeconds = 1.0;
constexpr double kOracleSeconds = 30.0;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) detail = what;
    ok = ok && condition;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool near(double a, double b, double tol = kProbTolerance) { return std::fabs(a - b) <= tol; }

bool cost_le(double a, double b) { return a <= b + kCostRelTolerance * std::max({1.0, std::fabs(a), std::fabs(b)}); }

const Row r11{std::int64_t{1}, std::int64_t{1}};
const Row r21{std::int64_t{2}, std::int64_t{1}};

Plan builtin(const ProbDatabase& db, const std::string& name) { return parse_plan(*builtin_plan_text(name), db.lookup()); }

Itemset items(std::initializer_list<const char*> list) { return make_itemset({list.begin(), list.end()}); }

std::set<std::pair<Itemset, std::size_t>> closed_pairs(const std::vector<ClosedItemset>& closed) {
  std::set<std::pair<Itemset, std::size_t>> out;
  for (const auto& c : closed) out.insert({c.closure, c.support});
  return out;
}

TransactionDB random_transactions(std::mt19937_64& rng) {
  const std::size_t n_items = 1 + rng() % 12, n = 1 + rng() % 25;
  TransactionDB db;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<Item> row;
    for (std::size_t i = 0; i < n_items; ++i)
      if (rng() % 100 < 45) row.push_back(std::string(1, char('a' + i)));
    db.transactions.push_back({t + 1, make_itemset(row)});
  }
  return db;
}

Outcome ac1() {
  Outcome out;
  const auto start = Clock::now();
  const auto db = load_transactions(testing::data_dir() + "/transactions.txt");
  out.require(closed_pairs(mine_cfi(db, 3).closed) ==
                  std::set<std::pair<Itemset, std::size_t>>{
                      {items({"a"}), 3}, {items({"c", "f"}), 4}, {items({"e"}), 4}, {items({"c", "e", "f"}), 3}},
              "minSup=3 closures differ");
  std::vector<ClosedItemset> expected{{items({"a"}), items({"a"}), 3},
                                      {items({"c", "f"}), items({"c"}), 4},
                                      {items({"e"}), items({"e"}), 4},
                                      {items({"a", "c", "d", "f"}), items({"a", "c"}), 2},
                                      {items({"a", "e"}), items({"a", "e"}), 2},
                                      {items({"c", "e", "f"}), items({"c", "e"}), 3}};
  auto got = mine_cfi(db, 2).closed;
  auto by_closure = [](const ClosedItemset& x, const ClosedItemset& y) { return x.closure < y.closure; };
  std::sort(got.begin(), got.end(), by_closure);
  std::sort(expected.begin(), expected.end(), by_closure);
  out.require(got == expected, "minSup=2 rows differ");
  const double elapsed = seconds_since(start);
  out.require(elapsed < kGoldenSeconds, "took " + std::to_string(elapsed) + " s");
  return out;
}

Outcome ac2() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int round = 0; round < 100; ++round) {
    const auto db = random_transactions(rng);
    const std::size_t min_support = 1 + rng() % db.size();
    const auto brute = brute_force_closed(db, min_support);
    if (closed_pairs(mine_cfi(db, min_support).closed) != std::set(brute.begin(), brute.end())) ++mismatches;
  }
  out.require(mismatches == 0, std::to_string(mismatches) + " mismatching databases");
  const double elapsed = seconds_since(start);
  out.require(elapsed < kOracleSeconds, "took " + std::to_string(elapsed) + " s");
  out.detail = out.ok ? "100 databases in " + std::to_string(elapsed) + " s" : out.detail;
  return out;
}

Outcome ac3() {
  Outcome out;
  const auto db = testing::example_db();
  auto p1 = testing::as_map(eval_plan_extensional(db, builtin(db, "P1")).relation);
  out.require(near(p1[r11], 0.34125), "P1 (1,1) = " + std::to_string(p1[r11]));
  auto p2 = testing::as_map(eval_plan_extensional(db, builtin(db, "P2")).relation);
  out.require(p2.size() == 2 && near(p2[r11], 0.24) && near(p2[r21], 0.08), "P2 answers differ");
  auto oracle = testing::as_map(oracle_marginals(db, testing::q_e(db)));
  out.require(testing::close_maps(oracle, p2, kProbTolerance), "oracle disagrees with P2");
  for (const auto* m : {&p2, &oracle})
    for (const auto& [row, p] : *m) out.require(!near(p, 0.016, 1e-6), "0.016 present");
  return out;
}

Outcome ac4() {
  Outcome out;
  const auto db = testing::example_db();
  const auto q = testing::q_e(db);
  const auto attrs = q.attributes();
  const AttrSet all(attrs.begin(), attrs.end());
  out.require(!is_safe_project({{"Emp", "did"}, {"Emp", "rid"}}, all, {"Emp", "Dept", "Rank"}, induced_fds(q, {})),
              "top projection of P1 accepted");
  out.require(!project_node_is_safe(builtin(db, "P1")), "P1 root judged safe");
  const auto plan = safe_plan(q);
  out.require(plan.has_value(), "no safe plan for q_e");
  if (!plan) return out;
  std::function<void(const Plan&)> visit = [&](const Plan& p) {
    if (!p) return;
    if (p->kind == PlanNode::Kind::Project) out.require(project_node_is_safe(p), "unsafe projection " + serialize(p));
    visit(p->left);
    visit(p->right);
  };
  visit(*plan);
  const auto result = reorder_columns(eval_plan_extensional(db, *plan).relation, head_columns(q));
  out.require(testing::close_maps(testing::as_map(result), testing::as_map(oracle_marginals(db, q)), kProbTolerance),
              "safe plan differs from the oracle");
  return out;
}

Outcome ac5() {
  Outcome out;
  const auto db = testing::example_db();
  const auto q = testing::q_e(db);
  const auto result = eval_plan_with_provenance(db, canonical_plan(q)).relation;
  const ProvenanceFormula expected({{"Dept:1", "Rank:1", "Emp:1"}, {"Dept:1", "Rank:1", "Emp:2"}});
  bool found = false;
  for (const auto& t : result.tuples)
    if (t.values == r11) {
      found = true;
      out.require(t.lineage == expected, "lineage of (1,1) is " + t.lineage.to_string());
      out.require(near(formula_probability(t.lineage, db.events()), 0.24), "probability of (1,1) differs");
    }
  out.require(found, "(1,1) missing");

  std::mt19937_64 rng(5);
  int unsafe = 0;
  for (int round = 0; round < 50; ++round) {
    const auto schema = testing::random_schema(rng);
    const auto rdb = testing::random_db(rng, schema);
    const auto rq = parse_query(testing::random_query_text(rng, schema), rdb.lookup());
    const Plan plan = canonical_plan(rq);
    unsafe += !plan_is_safe(plan);
    auto prov = eval_plan_with_provenance(rdb, plan).relation;
    apply_formula_probabilities(prov, rdb.events());
    prov = reorder_columns(prov, head_columns(rq));
    out.require(testing::close_maps(testing::as_map(prov), testing::as_map(oracle_marginals(rdb, rq)), kProbTolerance),
                "provenance differs from the oracle for " + to_sql(rq));
  }
  if (out.ok) out.detail = "50 random queries, " + std::to_string(unsafe) + " with unsafe plans";
  return out;
}

Catalog example_catalog(double t_emp) {
  std::istringstream in("T Dept 2\nT Rank 2\nV Emp did 2\nV Emp rid 1\nV Emp did,rid 2\nV Dept did 2\nV Rank rid 2\n");
  Catalog c = read_catalog(in);
  c.set_rows("Emp", t_emp);
  return c;
}

Outcome ac6() {
  Outcome out;
  const auto db = testing::example_db();
  const Plan p1 = builtin(db, "P1"), p2 = builtin(db, "P2");
  const double threshold = 2 + 2 + 2;  // T(Dept) + T(Rank) + V(Emp,[did,rid])
  for (int i = 1; i <= 20; ++i) {
    const double t = threshold + i * 37;
    Memo memo;
    const double c1 = plan_cost(p1, example_catalog(t), memo), c2 = plan_cost(p2, example_catalog(t), memo);
    out.require(c2 < c1, "T(Emp)=" + std::to_string(t) + ": P2 " + std::to_string(c2) + " vs P1 " + std::to_string(c1));
  }
  Memo memo;
  const double c1 = plan_cost(p1, example_catalog(3), memo), c2 = plan_cost(p2, example_catalog(3), memo);
  out.require(c1 < c2, "at T(Emp)=3 P1 is not cheaper");
  if (out.ok) out.detail = "T(Emp)=3: P1 " + std::to_string(c1) + " < P2 " + std::to_string(c2);
  return out;
}

Outcome ac7() {
  Outcome out;
  std::mt19937_64 rng(7);
  int cases = 0, plans = 0;
  while (cases < 100) {
    auto c = testing::random_case(rng);
    if (!c) continue;
    ++cases;
    Memo memo;
    const double before = plan_cost(c->plan, c->catalog, memo);
    out.require(cost_le(plan_cost(apply_sure_rules(c->plan), c->catalog, memo), before), "sure rules raised a cost");
    for (Law law : {Law::SelectBelowJoin, Law::SelectBelowProject})
      for (const auto& next : apply_law_anywhere(c->plan, law))
        if (testing::select_weight(next) < testing::select_weight(c->plan))
          out.require(cost_le(plan_cost(next, c->catalog, memo), before), "a pushdown step raised a cost");

    const auto eq = generate_equivalents(c->plan, 300);
    std::vector<ProbDatabase> dbs;
    for (int k = 0; k < 10; ++k) dbs.push_back(testing::random_db(rng, c->schema, 3, 2));
    for (const auto& p : eq.plans) {
      ++plans;
      out.require(plan_is_safe(p), "unsafe equivalent " + serialize(p));
      for (const auto& db : dbs) {
        const auto expected = testing::as_map(eval_plan_extensional(db, c->plan).relation);
        const auto got = testing::as_map(reorder_columns(eval_plan_extensional(db, p).relation, c->plan->columns));
        out.require(testing::close_maps(got, expected, kProbTolerance), "equivalent evaluates differently");
      }
    }

    if (count_joins(c->plan) <= 3) {
      const BestPlan best = find_best_plan(c->q, c->catalog, 100000);
      const auto all = generate_equivalents(*safe_plan(c->q), 100000);
      out.require(!all.truncated && !best.truncated, "exhaustive closure truncated");
      double minimum = std::numeric_limits<double>::infinity();
      for (const auto& p : all.plans) minimum = std::min(minimum, plan_cost(p, c->catalog, memo));
      out.require(cost_le(best.cost, minimum) && cost_le(minimum, best.cost),
                  "best " + std::to_string(best.cost) + " vs exhaustive " + std::to_string(minimum));
    }
  }
  if (out.ok) out.detail = "100 cases, " + std::to_string(plans) + " equivalent plans";
  return out;
}

Outcome ac8() {
  Outcome out;
  using Doc = KeyValue<std::size_t, std::string>;
  JobSpec<std::size_t, std::string, std::string, std::uint64_t> wc;
  wc.num_reducers = 3;
  wc.mapper = [](const Doc& doc, const std::monostate&, auto& emit) {
    std::istringstream words(doc.value);
    for (std::string w; words >> w;) emit.push_back({w, 1});
  };
  wc.combiner = [](const std::string& key, std::span<const std::uint64_t> values, auto& emit) {
    emit.push_back({key, std::accumulate(values.begin(), values.end(), std::uint64_t{0})});
  };
  wc.reducer = [](const std::string& key, std::span<const std::uint64_t> values, const std::monostate&, auto& emit) {
    emit.push_back({key, std::accumulate(values.begin(), values.end(), std::uint64_t{0})});
  };
  std::vector<Doc> docs;
  std::mt19937_64 rng(8);
  for (std::size_t i = 0; i < 40; ++i) {
    std::string text;
    for (int w = 0; w < 12; ++w) text += std::string(1, char('a' + rng() % 9)) + " ";
    docs.push_back({i, text});
  }
  const auto splits = make_splits(docs, 3);

  const auto tdb = load_transactions(testing::data_dir() + "/transactions.txt");
  struct Ctx {
    std::vector<ClosedItemset> previous{ClosedItemset{}};
    std::set<Item> frequent{"a", "b", "c", "d", "e", "f"};
  } ctx;
  JobSpec<std::size_t, Itemset, Itemset, GeneratorValue, Itemset, ClosedItemset, Ctx> cfi;
  cfi.num_reducers = 2;
  cfi.mapper = [](const KeyValue<std::size_t, Itemset>& r, const Ctx& c, auto& emit) {
    for (auto& m : cfi_map(Transaction{r.key, r.value}, c.previous, c.frequent)) emit.push_back(std::move(m));
  };
  cfi.combiner = [](const Itemset& key, std::span<const GeneratorValue> values, auto& emit) {
    emit.push_back({key, cfi_combine(key, values)});
  };
  cfi.reducer = [](const Itemset& key, std::span<const GeneratorValue> values, const Ctx&, auto& emit) {
    if (auto closed = cfi_reduce(key, values, 2)) emit.push_back({key, *closed});
  };
  std::vector<KeyValue<std::size_t, Itemset>> records;
  for (const auto& t : tdb.transactions) records.push_back({t.tid, t.items});
  const auto cfi_splits = make_splits(records, 2);

  auto render_wc = [](const auto& result) {
    std::ostringstream s;
    for (const auto& kv : result.flat()) s << kv.key << '\t' << kv.value << '\n';
    return s.str();
  };
  auto render_cfi = [](const auto& result) {
    std::ostringstream s;
    for (const auto& kv : result.flat())
      s << to_string(kv.key) << '\t' << to_string(kv.value.closure) << '\t' << kv.value.support << '\n';
    return s.str();
  };
  const auto wc_ref = run_job(wc, splits, std::monostate{}, {1});
  const auto cfi_ref = run_job(cfi, cfi_splits, ctx, {1});
  for (unsigned workers : {1u, 4u})
    for (int run = 0; run < 10; ++run) {
      const auto a = run_job(wc, splits, std::monostate{}, {workers});
      out.require(render_wc(a) == render_wc(wc_ref) && a.counters == wc_ref.counters, "word count varied");
      const auto b = run_job(cfi, cfi_splits, ctx, {workers});
      out.require(render_cfi(b) == render_cfi(cfi_ref) && b.counters == cfi_ref.counters, "CFI iteration varied");
    }
  return out;
}

Outcome ac9() {
  Outcome out;
  const std::string dir = testing::data_dir() + "/scenarios/";
  const auto warm = load_scenario(dir + "warm.txt");
  const std::uint64_t n = warm.jobs[0].splits * warm.jobs[0].records_per_split;
  out.require(simulate_job_sequence(warm, CachePolicy::On).remote_records() == std::vector<std::uint64_t>{n, 0, 0},
              "cache-on fetches differ");
  out.require(simulate_job_sequence(warm, CachePolicy::Off).remote_records() == std::vector<std::uint64_t>{n, n, n},
              "cache-off fetches differ");
  out.require(simulate_job_sequence(load_scenario(dir + "pressure.txt"), CachePolicy::On).remote_records() ==
                  std::vector<std::uint64_t>{4, 1, 1},
              "pressure scenario differs");
  out.require(simulate_job_sequence(load_scenario(dir + "thrash.txt"), CachePolicy::On).remote_records() ==
                  std::vector<std::uint64_t>{4, 4, 4},
              "thrash scenario differs");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"AC1 CFI golden", ac1},
      {"AC2 CFI oracle equivalence", ac2},
      {"AC3 probabilistic goldens", ac3},
      {"AC4 safety", ac4},
      {"AC5 provenance", ac5},
      {"AC6 optimizer flip", ac6},
      {"AC7 rewrite properties", ac7},
      {"AC8 engine determinism", ac8},
      {"AC9 cache simulation", ac9},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    failed += !outcome.ok;
    std::cout << (outcome.ok ? "[PASS] " : "[FAIL] ") << name;
    if (!outcome.detail.empty()) std::cout << " (" << outcome.detail << ")";
    std::cout << '\n';
  }
  return failed == 0 ? 0 : 1;
}
