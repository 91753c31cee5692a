#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "tkgqa/rng.hpp"
#include "tkgqa/tkg.hpp"

using namespace tkgqa;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("load_kg parses the single-line example") {
  const std::string p = tmp_path("kg_single.tsv");
  write_file(p, "A\trel\tB\t2000\t2005\n");
  TemporalKG kg = load_kg(p);
  CHECK(kg.n_facts() == 1);
  CHECK(kg.n_entities() == 2);
  CHECK(kg.n_relations() == 1);
  CHECK(kg.y_min() == 2000);
  CHECK(kg.y_max() == 2005);
  CHECK(kg.entity_label(kDummyEntity) == std::string(kDummyLabel));
  CHECK(kg.entity_id("A") == 1);
  CHECK(kg.entity_id("B") == 2);
  std::remove(p.c_str());
}

TEST_CASE("load_kg accepts event facts and rejects bad input") {
  const std::string p = tmp_path("kg_events.tsv");
  write_file(p, "WWII\tsignificant event\toccurred\t1939\t1945\tE\n");
  TemporalKG kg = load_kg(p);
  REQUIRE(kg.n_facts() == 1);
  CHECK(kg.facts()[0].is_event);
  CHECK(kg.is_event_entity(kg.entity_id("WWII")));
  std::remove(p.c_str());

  const std::string bad1 = tmp_path("kg_bad1.tsv");
  write_file(bad1, "A\trel\tB\t2005\t2000\n");
  CHECK_THROWS_WITH_AS(load_kg(bad1), doctest::Contains(":1:"), std::runtime_error);
  std::remove(bad1.c_str());

  const std::string bad2 = tmp_path("kg_bad2.tsv");
  write_file(bad2, "A\trel\tB\t2000\t2005\tX\n");
  CHECK_THROWS_WITH_AS(load_kg(bad2), doctest::Contains("unknown flag"), std::runtime_error);
  std::remove(bad2.c_str());

  const std::string bad3 = tmp_path("kg_bad3.tsv");
  write_file(bad3, "A\trel\tB\t2000\n");
  CHECK_THROWS(load_kg(bad3));
  std::remove(bad3.c_str());

  const std::string bad4 = tmp_path("kg_bad4.tsv");
  write_file(bad4, "A\trel\tB\ttwo-thousand\t2005\n");
  CHECK_THROWS_WITH_AS(load_kg(bad4), doctest::Contains("year"), std::runtime_error);
  std::remove(bad4.c_str());
}

TEST_CASE("facts_valid_at follows closed-interval containment") {
  const std::string p = tmp_path("kg_valid.tsv");
  write_file(p, "A\tr\tB\t2000\t2005\n");
  TemporalKG kg = load_kg(p);
  const EntityId a = kg.entity_id("A");
  const RelationId r = kg.relation_id("r");
  CHECK(kg.facts_valid_at(a, r, 2003).size() == 1);
  CHECK(kg.facts_valid_at(a, r, 2000).size() == 1);  // closed on both ends
  CHECK(kg.facts_valid_at(a, r, 2005).size() == 1);
  CHECK(kg.facts_valid_at(a, r, 2006).empty());
  std::remove(p.c_str());
}

TEST_CASE("toy KG generation: determinism, seed sensitivity, invariants") {
  ToyKgParams params;
  params.seed = 7;
  params.n_entities = 200;
  params.n_relations = 5;
  params.year_min = 1950;
  params.year_max = 2020;
  params.n_facts = 3000;

  TemporalKG kg1 = generate_toy_kg(params);
  TemporalKG kg2 = generate_toy_kg(params);

  const std::string p1 = tmp_path("toy1.tsv"), p2 = tmp_path("toy2.tsv");
  save_kg(kg1, p1);
  save_kg(kg2, p2);
  CHECK(slurp(p1) == slurp(p2));  // byte-identical

  params.seed = 8;
  TemporalKG kg3 = generate_toy_kg(params);
  const std::string p3 = tmp_path("toy3.tsv");
  save_kg(kg3, p3);
  CHECK(slurp(p1) != slurp(p3));

  // declared ranges and scale
  CHECK(kg1.y_min() == 1950);
  CHECK(kg1.y_max() == 2020);
  CHECK(kg1.n_facts() >= 2900);
  CHECK(kg1.n_entities() >= 190);
  CHECK(kg1.event_fact_ids().size() >= 2);

  // every entity appears in at least one fact
  std::set<EntityId> covered;
  for (const auto& f : kg1.facts()) {
    covered.insert(f.subject);
    covered.insert(f.object);
  }
  CHECK(covered.size() == kg1.n_entities());
  CHECK(covered.count(kDummyEntity) == 0);

  // relation balance: no relation above 50% of facts
  std::map<RelationId, std::size_t> by_rel;
  for (const auto& f : kg1.facts()) by_rel[f.relation]++;
  for (const auto& [rel, n] : by_rel) {
    INFO("relation ", kg1.relation_label(rel), " holds ", n, " facts");
    CHECK(n * 2 <= kg1.n_facts());
  }

  // round trip through the TSV writer preserves the fact multiset
  TemporalKG back = load_kg(p1);
  REQUIRE(back.n_facts() == kg1.n_facts());
  for (std::size_t i = 0; i < kg1.n_facts(); ++i) {
    const auto& f = kg1.facts()[i];
    const auto& g = back.facts()[i];
    CHECK(kg1.entity_label(f.subject) == back.entity_label(g.subject));
    CHECK(kg1.relation_label(f.relation) == back.relation_label(g.relation));
    CHECK(kg1.entity_label(f.object) == back.entity_label(g.object));
    CHECK(f.start == g.start);
    CHECK(f.end == g.end);
    CHECK(f.is_event == g.is_event);
  }
  // the vocab sidecar pins id assignment
  CHECK(back.entity_id(kg1.entity_label(1)) == 1);

  std::remove(p1.c_str());
  std::remove((p1 + ".vocab.json").c_str());
  std::remove(p2.c_str());
  std::remove((p2 + ".vocab.json").c_str());
  std::remove(p3.c_str());
  std::remove((p3 + ".vocab.json").c_str());
}

TEST_CASE("toy KG rejects infeasible parameters") {
  ToyKgParams p;
  p.n_entities = 200;
  p.n_facts = 100;  // fewer facts than entities
  CHECK_THROWS(generate_toy_kg(p));
  ToyKgParams p2;
  p2.n_entities = 5;
  CHECK_THROWS(generate_toy_kg(p2));
}

TEST_CASE("index partition property and brute-force agreement") {
  ToyKgParams params;
  params.n_entities = 60;
  params.n_facts = 700;
  params.seed = 11;
  TemporalKG kg = generate_toy_kg(params);

  // (subject, relation) index partitions the fact list
  std::multiset<std::size_t> via_index;
  for (EntityId s = 0; s <= kg.n_entities(); ++s)
    for (RelationId r = 0; r < kg.n_relations() + 1; ++r)
      for (auto fi : kg.facts_sr(s, r)) via_index.insert(fi);
  CHECK(via_index.size() == kg.n_facts());
  std::size_t expect = 0;
  for (std::size_t i = 0; i < kg.n_facts(); ++i) expect += via_index.count(i) == 1 ? 1 : 0;
  CHECK(expect == kg.n_facts());

  // facts_valid_at equals a brute-force filter for random queries
  Rng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    const EntityId s = static_cast<EntityId>(1 + rng.uniform_u64(kg.n_entities()));
    const RelationId r = static_cast<RelationId>(rng.uniform_u64(kg.n_relations() + 1));
    const int y = kg.y_min() + static_cast<int>(rng.uniform_u64(kg.n_years()));
    auto fast = kg.facts_valid_at(s, r, y);
    std::vector<TemporalFact> slow;
    for (const auto& f : kg.facts())
      if (f.subject == s && f.relation == r && f.start <= y && y <= f.end) slow.push_back(f);
    CHECK(fast.size() == slow.size());
  }
}

TEST_CASE("duplicate quintuples are dropped once") {
  const std::string p = tmp_path("kg_dup.tsv");
  write_file(p, "A\tr\tB\t2000\t2005\nA\tr\tB\t2000\t2005\nA\tr\tB\t2001\t2005\n");
  TemporalKG kg = load_kg(p);
  CHECK(kg.n_facts() == 2);
  CHECK(kg.duplicates_dropped() == 1);
  std::remove(p.c_str());
}
