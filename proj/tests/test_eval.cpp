#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tkgqa/eval.hpp"
#include "tkgqa/rng.hpp"

using namespace tkgqa;

TEST_CASE("hits_at_k definition") {
  // gold={B}, ranking [A,B,C]
  std::vector<std::size_t> ranking = {0, 1, 2};
  std::vector<std::size_t> gold = {1};
  CHECK(hits_at_k(ranking, gold, 1) == 0);
  CHECK(hits_at_k(ranking, gold, 2) == 1);

  // gold = full candidate set
  std::vector<std::size_t> all_gold = {0, 1, 2};
  CHECK(hits_at_k(ranking, all_gold, 1) == 1);

  CHECK_THROWS(hits_at_k(ranking, gold, 0));
  CHECK_THROWS(hits_at_k(ranking, {}, 1));
}

TEST_CASE("random rankings hit a singleton gold at ~k/n") {
  Rng rng(12345);
  const std::size_t n = 100, k = 10;
  const int trials = 2000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    perm.resize(k);
    hits += hits_at_k(perm, {rng.uniform_u64(n)}, k);
  }
  const double p = static_cast<double>(hits) / trials;
  const double expect = static_cast<double>(k) / static_cast<double>(n);
  const double sigma = std::sqrt(expect * (1 - expect) / trials);
  INFO("p=", p, " expect=", expect);
  CHECK(std::abs(p - expect) <= 3 * sigma + 1e-9);
}

TEST_CASE("report JSON carries the documented schema") {
  EvalReport rep;
  rep.split = "test";
  rep.config_fingerprint = "cafe";
  rep.overall = {0.5, 0.8, 10};
  rep.by_qtype["simple_time"] = {1.0, 1.0, 4};
  rep.by_class["simple"] = {1.0, 1.0, 4};
  rep.by_answer["time"] = {0.5, 0.8, 10};

  auto j = report_to_json(rep);
  CHECK(j["schema"] == "tkgqa-eval-report/v1");
  CHECK(j["split"] == "test");
  CHECK(j["n"] == 10);
  CHECK(j["overall"]["hits1"] == 0.5);
  CHECK(j["by_qtype"].contains("simple_time"));
  CHECK(!j["by_qtype"].contains("before_after"));  // absent stratum stays absent

  const std::string table = report_table(rep);
  CHECK(table.find("overall") != std::string::npos);
}

TEST_CASE("size_ablation validates fractions") {
  std::vector<QAInstance> train(1500);
  auto noop = [](const std::vector<QAInstance>&) { return EvalReport{}; };
  CHECK_THROWS(size_ablation({}, train, 1, noop));
  CHECK_THROWS(size_ablation({0.5, 0.5}, train, 1, noop));        // not increasing
  CHECK_THROWS(size_ablation({0.5, 0.3}, train, 1, noop));        // not increasing
  CHECK_THROWS(size_ablation({0.0, 0.5}, train, 1, noop));        // out of range
  CHECK_THROWS(size_ablation({0.01}, train, 1, noop));            // < 100 questions

  // single fraction gives a curve of length 1
  int calls = 0;
  auto counting = [&](const std::vector<QAInstance>& subset) {
    ++calls;
    EvalReport r;
    r.overall.count = subset.size();
    return r;
  };
  auto curve = size_ablation({1.0}, train, 1, counting);
  CHECK(curve.size() == 1);
  CHECK(calls == 1);
  CHECK(curve[0].n_train == train.size());

  // nested prefixes: each later subset contains every earlier instance
  std::vector<QAInstance> named(300);
  for (std::size_t i = 0; i < named.size(); ++i) named[i].question = std::to_string(i);
  std::vector<std::vector<std::string>> seen;
  auto record = [&](const std::vector<QAInstance>& subset) {
    std::vector<std::string> qs;
    for (const auto& q : subset) qs.push_back(q.question);
    seen.push_back(qs);
    return EvalReport{};
  };
  size_ablation({0.5, 1.0}, named, 9, record);
  REQUIRE(seen.size() == 2);
  for (std::size_t i = 0; i < seen[0].size(); ++i) CHECK(seen[0][i] == seen[1][i]);
}

TEST_CASE("overall equals the count-weighted mean of per-type metrics") {
  // constructed counts: the identity must hold exactly in the aggregation
  EvalReport rep;
  rep.by_qtype["a"] = {0.5, 0.75, 4};
  rep.by_qtype["b"] = {1.0, 1.0, 6};
  double weighted = 0;
  std::size_t total = 0;
  for (const auto& [k, v] : rep.by_qtype) {
    weighted += v.hits1 * static_cast<double>(v.count);
    total += v.count;
  }
  rep.overall = {weighted / static_cast<double>(total), 0.9, total};
  CHECK(rep.overall.hits1 == doctest::Approx(0.8).epsilon(1e-12));
}
