#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mrlab/engine.hpp"

using namespace mrlab;

namespace {

using Doc = KeyValue<std::size_t, std::string>;

JobSpec<std::size_t, std::string, std::string, std::uint64_t> word_count(bool combine, std::size_t reducers) {
  JobSpec<std::size_t, std::string, std::string, std::uint64_t> spec;
  spec.num_reducers = reducers;
  spec.mapper = [](const Doc& doc, const std::monostate&, auto& out) {
    std::istringstream words(doc.value);
    for (std::string w; words >> w;) out.push_back({w, 1});
  };
  auto sum = [](const std::string& key, std::span<const std::uint64_t> values, auto& out) {
    std::uint64_t total = 0;
    for (auto v : values) total += v;
    out.push_back({key, total});
  };
  if (combine) spec.combiner = sum;
  spec.reducer = [sum](const std::string& key, std::span<const std::uint64_t> values, const std::monostate&,
                       auto& out) { sum(key, values, out); };
  return spec;
}

std::vector<Doc> docs(const std::vector<std::string>& texts) {
  std::vector<Doc> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({i, texts[i]});
  return out;
}

std::map<std::string, std::uint64_t> as_map(const std::vector<KeyValue<std::string, std::uint64_t>>& kvs) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& kv : kvs) out[kv.key] += kv.value;
  return out;
}

std::vector<std::string> random_docs(std::mt19937_64& rng) {
  std::vector<std::string> out(1 + rng() % 12);
  for (auto& doc : out)
    for (std::size_t w = rng() % 9; w > 0; --w) doc += std::string(1, char('a' + rng() % 6)) + " ";
  return out;
}

}  // namespace

TEST_CASE("make_splits cuts consecutive chunks") {
  std::vector<KeyValue<int, int>> five{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
  auto splits = make_splits(five, 2);
  REQUIRE(splits.size() == 3);
  CHECK(splits[0].records.size() == 2);
  CHECK(splits[1].records.size() == 2);
  CHECK(splits[2].records.size() == 1);
  CHECK(splits[2].split_id == 2);
  CHECK(make_splits(std::vector<KeyValue<int, int>>{}, 4).empty());
  CHECK(make_splits(std::vector<KeyValue<int, int>>(6, {0, 0}), 6).size() == 1);
  CHECK_THROWS_AS(make_splits(five, 0), std::invalid_argument);
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("word count") {
  auto result = run_job(word_count(false, 2), make_splits(docs({"a b a", "b"}), 1), std::monostate{});
  CHECK(as_map(result.flat()) == std::map<std::string, std::uint64_t>{{"a", 2}, {"b", 2}});
  CHECK(result.counters.map_total() == 2);
  CHECK(result.counters.reduce_total() == 4);
  CHECK(result.counters.total() == 6);
}

TEST_CASE("combiner keeps output and lowers reduce input") {
  const auto splits = make_splits(docs({"a b a", "b"}), 1);
  auto plain = run_job(word_count(false, 2), splits, std::monostate{});
  auto combined = run_job(word_count(true, 2), splits, std::monostate{});
  CHECK(as_map(plain.flat()) == as_map(combined.flat()));
  CHECK(combined.counters.reduce_total() == 3);
  CHECK(combined.counters.reduce_total() < plain.counters.reduce_total());
}

TEST_CASE("identity map-only job") {
  JobSpec<int, int, int, int> spec;
  spec.mapper = [](const KeyValue<int, int>& r, const std::monostate&, auto& out) { out.push_back(r); };
  std::vector<KeyValue<int, int>> input{{3, 1}, {1, 2}, {2, 3}};
  auto result = run_job(spec, make_splits(input, 2), std::monostate{});
  CHECK(result.flat() == input);
  CHECK(result.counters.total() == 3);
  CHECK(result.counters.reduce_input_records.empty());
}

TEST_CASE("each reducer output is sorted and keys land on one reducer") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    auto result = run_job(word_count(true, 3), make_splits(docs(random_docs(rng)), 2), std::monostate{});
    std::set<std::string> keys;
    for (const auto& part : result.output) {
      CHECK(std::is_sorted(part.begin(), part.end(), [](auto& a, auto& b) { return a.key < b.key; }));
      for (const auto& kv : part) CHECK(keys.insert(kv.key).second);
    }
  }
}

TEST_CASE("word count against a direct count, combiner on and off") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    const auto texts = random_docs(rng);
    std::map<std::string, std::uint64_t> expected;
    for (const auto& t : texts) {
      std::istringstream in(t);
      for (std::string w; in >> w;) ++expected[w];
    }
    const std::size_t split_size = 1 + rng() % 4, reducers = 1 + rng() % 4;
    const auto splits = make_splits(docs(texts), split_size);
    auto plain = run_job(word_count(false, reducers), splits, std::monostate{});
    auto combined = run_job(word_count(true, reducers), splits, std::monostate{});
    CHECK(as_map(plain.flat()) == expected);
    CHECK(as_map(combined.flat()) == expected);
    CHECK(combined.counters.reduce_total() <= plain.counters.reduce_total());

    // Cost law: map input is the input size, reduce input is the map output.
    std::uint64_t words = 0, combined_words = 0;
    for (const auto& s : splits) {
      std::set<std::string> distinct;
      for (const auto& d : s.records) {
        std::istringstream in(d.value);
        for (std::string w; in >> w;) {
          ++words;
          distinct.insert(w);
        }
      }
      combined_words += distinct.size();
    }
    CHECK(plain.counters.map_total() == texts.size());
    CHECK(plain.counters.reduce_total() == words);
    CHECK(combined.counters.reduce_total() == combined_words);
  }
}

TEST_CASE("output and counters do not depend on the worker count") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 10; ++round) {
    const auto splits = make_splits(docs(random_docs(rng)), 1 + rng() % 3);
    const auto reference = run_job(word_count(true, 3), splits, std::monostate{}, {1});
    for (unsigned workers : {2u, 4u, 8u}) {
      const auto again = run_job(word_count(true, 3), splits, std::monostate{}, {workers});
      CHECK(again.output == reference.output);
      CHECK(again.counters == reference.counters);
    }
  }
}

TEST_CASE("task failures name the task") {
  JobSpec<int, int, int, int> spec;
  spec.mapper = [](const KeyValue<int, int>& r, const std::monostate&, auto& out) {
    if (r.key == 2) throw std::runtime_error("bad record");
    out.push_back(r);
  };
  std::vector<KeyValue<int, int>> input{{0, 0}, {1, 0}, {2, 0}};
  try {
    run_job(spec, make_splits(input, 1), std::monostate{}, {4});
    FAIL("expected a TaskError");
  } catch (const TaskError& e) {
    CHECK(e.task_id() == "map-2");
  }

  spec.mapper = [](const KeyValue<int, int>& r, const std::monostate&, auto& out) { out.push_back(r); };
  spec.reducer = [](const int&, std::span<const int>, const std::monostate&, auto&) {
    throw std::runtime_error("reducer down");
  };
  CHECK_THROWS_AS(run_job(spec, make_splits(input, 1), std::monostate{}), TaskError);
  spec.num_reducers = 0;
  CHECK_THROWS_AS(run_job(spec, make_splits(input, 1), std::monostate{}), std::invalid_argument);
}
