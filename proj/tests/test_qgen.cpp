#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "tkgqa/qgen.hpp"
#include "tkgqa/tkg.hpp"

using namespace tkgqa;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TemporalKG kg_from(const std::string& tsv) {
  const std::string p = tmp_path("qgen_kg.tsv");
  std::ofstream out(p);
  out << tsv;
  out.close();
  TemporalKG kg = load_kg(p);
  std::remove(p.c_str());
  return kg;
}

const QuestionTemplate& find_seed(ReasoningType t, const std::string& relation,
                                  AnswerKind kind = AnswerKind::kEntity) {
  for (const auto& tm : builtin_templates())
    if (tm.qtype == t && tm.relation == relation &&
        (t != ReasoningType::kFirstLast || tm.answer_kind == kind))
      return tm;
  throw std::runtime_error("no such template");
}

TemporalKG toy() {
  ToyKgParams p;
  p.seed = 7;
  p.n_entities = 120;
  p.n_relations = 5;
  p.year_min = 1950;
  p.year_max = 2020;
  p.n_facts = 1500;
  return generate_toy_kg(p);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("builtin catalog: coverage and paper examples") {
  const auto& catalog = builtin_templates();
  std::set<std::string> seeds;
  std::map<ReasoningType, int> per_type;
  for (const auto& t : catalog) {
    if (seeds.insert(t.seed_id).second) per_type[t.qtype]++;
  }
  CHECK(seeds.size() >= 25);
  for (int ty = 0; ty < 5; ++ty) CHECK(per_type[static_cast<ReasoningType>(ty)] >= 5);

  // the Table-2 wordings are present
  std::set<std::string> texts;
  for (const auto& t : catalog) texts.insert(t.text);
  CHECK(texts.count("when did {head} hold the position of {tail}") == 1);
  CHECK(texts.count("who was the {tail} {type} {head}") == 1);
  CHECK(texts.count("who held the position of {tail} during {event}") == 1);
  CHECK(texts.count("which award did {head} receive in {time}") == 1);

  validate_catalog(catalog);  // must not throw
}

TEST_CASE("compute_answers: simple_time over one interval") {
  TemporalKG kg = kg_from("alice\tposition held\tmayor\t2000\t2005\n");
  const auto& tmpl = find_seed(ReasoningType::kSimpleTime, "position held");
  SlotBinding b;
  b.head = kg.entity_id("alice");
  b.tail = kg.entity_id("mayor");
  AnswerSet a = compute_answers(tmpl, b, kg);
  CHECK(a.kind == AnswerKind::kTime);
  CHECK(a.years == std::vector<int>{2000, 2001, 2002, 2003, 2004, 2005});
}

TEST_CASE("compute_answers: before/after picks the immediate neighbor") {
  TemporalKG kg = kg_from(
      "x\tposition held\tp\t1990\t1994\n"
      "y\tposition held\tp\t1995\t1999\n"
      "z\tposition held\tp\t2001\t2004\n");
  const auto& tmpl = find_seed(ReasoningType::kBeforeAfter, "position held");
  SlotBinding b;
  b.head = kg.entity_id("z");
  b.tail = kg.entity_id("p");
  b.type_word = "before";
  AnswerSet a = compute_answers(tmpl, b, kg);
  REQUIRE(a.entities.size() == 1);
  CHECK(a.entities[0] == kg.entity_id("y"));

  // exhaustive check over every holder as head
  for (const char* head : {"x", "y", "z"}) {
    SlotBinding bb;
    bb.head = kg.entity_id(head);
    bb.tail = kg.entity_id("p");
    bb.type_word = "after";
    AnswerSet aa = compute_answers(tmpl, bb, kg);
    for (EntityId e : aa.entities) CHECK(e != bb.head);
  }

  // first holder has no predecessor
  SlotBinding b2;
  b2.head = kg.entity_id("x");
  b2.tail = kg.entity_id("p");
  b2.type_word = "before";
  CHECK(compute_answers(tmpl, b2, kg).empty());
}

TEST_CASE("compute_answers: time_join intersects intervals") {
  TemporalKG kg = kg_from(
      "a\tmember of sports team\tt\t2000\t2004\n"
      "b\tmember of sports team\tt\t2003\t2008\n"
      "c\tmember of sports team\tt\t2006\t2009\n");
  const auto& tmpl = find_seed(ReasoningType::kTimeJoin, "member of sports team");
  SlotBinding b;
  b.head = kg.entity_id("a");
  b.tail = kg.entity_id("t");
  AnswerSet a = compute_answers(tmpl, b, kg);
  REQUIRE(a.entities.size() == 1);
  CHECK(a.entities[0] == kg.entity_id("b"));  // c's interval is disjoint from a's
}

TEST_CASE("compute_answers: first/last over facts of the head") {
  TemporalKG kg = kg_from(
      "m\temployer\to1\t1990\t1995\n"
      "m\temployer\to2\t1996\t2001\n"
      "m\temployer\to3\t2003\t2007\n");
  const auto& t_time = find_seed(ReasoningType::kFirstLast, "employer", AnswerKind::kTime);
  const auto& t_ent = find_seed(ReasoningType::kFirstLast, "employer", AnswerKind::kEntity);
  SlotBinding b;
  b.head = kg.entity_id("m");
  b.adj_word = "first";
  CHECK(compute_answers(t_time, b, kg).years == std::vector<int>{1990});
  CHECK(compute_answers(t_ent, b, kg).entities == std::vector<EntityId>{kg.entity_id("o1")});
  b.adj_word = "last";
  CHECK(compute_answers(t_time, b, kg).years == std::vector<int>{2007});
  CHECK(compute_answers(t_ent, b, kg).entities == std::vector<EntityId>{kg.entity_id("o3")});
}

TEST_CASE("compute_answers rejects unbound slots") {
  TemporalKG kg = kg_from("a\tspouse\tb\t2000\t2001\n");
  const auto& tmpl = find_seed(ReasoningType::kSimpleTime, "spouse");
  SlotBinding b;  // nothing bound
  CHECK_THROWS_WITH_AS(compute_answers(tmpl, b, kg), doctest::Contains("unbound"),
                       std::invalid_argument);
}

TEST_CASE("generate_dataset: determinism, counts, verified answers") {
  TemporalKG kg = toy();
  SplitSpec split;
  split.seed = 5;
  GenerationStats stats;
  auto data = generate_dataset(kg, builtin_templates(), split, 3000, &stats);

  CHECK(stats.generated >= 2850);  // >= 95% of target
  for (int t = 0; t < 5; ++t) {
    INFO("type ", reasoning_type_name(static_cast<ReasoningType>(t)));
    CHECK(stats.per_type[t] > 0);
  }

  // every instance: nonempty answers, in-vocabulary, spans well-formed
  for (const auto& inst : data) {
    CHECK(!inst.answers.empty());
    for (EntityId e : inst.answers.entities) {
      CHECK(e >= 1);
      CHECK(e <= kg.n_entities());
    }
    for (int y : inst.answers.years) {
      CHECK(y >= kg.y_min());
      CHECK(y <= kg.y_max());
    }
    std::size_t prev = 0;
    for (const auto& m : inst.entities) {
      CHECK(m.begin >= prev);
      CHECK(m.end <= inst.question.size());
      CHECK(inst.question.substr(m.begin, m.end - m.begin) == m.mention);
      prev = m.end;
    }
    // answer-set sanity per type
    if (inst.qtype == ReasoningType::kBeforeAfter || inst.qtype == ReasoningType::kTimeJoin) {
      for (EntityId e : inst.answers.entities)
        for (const auto& m : inst.entities)
          if (m.begin == inst.entities.front().begin && inst.qtype == ReasoningType::kTimeJoin &&
              !m.is_event)
            CHECK(true);  // detailed subject-exclusion checked by the verifier
      (void)inst;
    }
  }

  // byte determinism
  const std::string p1 = tmp_path("d1.jsonl"), p2 = tmp_path("d2.jsonl");
  write_dataset(data, p1);
  auto data2 = generate_dataset(kg, builtin_templates(), split, 3000, nullptr);
  write_dataset(data2, p2);
  CHECK(slurp(p1) == slurp(p2));

  // target 0 gives an empty dataset
  auto none = generate_dataset(kg, builtin_templates(), split, 0, nullptr);
  CHECK(none.empty());

  // round trip through JSONL
  auto back = read_dataset(p1, kg);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].question == data[i].question);
    CHECK(back[i].answers == data[i].answers);
    CHECK(back[i].split == data[i].split);
  }
  const std::string p3 = tmp_path("d3.jsonl");
  write_dataset(back, p3);
  CHECK(slurp(p1) == slurp(p3));

  std::remove(p1.c_str());
  std::remove(p2.c_str());
  std::remove(p3.c_str());
}

TEST_CASE("splits: paraphrase-group atomicity and entity disjointness") {
  TemporalKG kg = toy();
  SplitSpec split;
  split.seed = 9;
  auto data = generate_dataset(kg, builtin_templates(), split, 3000, nullptr);

  std::map<std::string, std::set<std::string>> group_folds;
  std::set<EntityId> train_ents, eval_ents;
  std::size_t n_train = 0, n_dev = 0, n_test = 0;
  for (const auto& inst : data) {
    group_folds[paraphrase_group_key(inst)].insert(inst.split);
    for (const auto& m : inst.entities) {
      if (m.is_event) continue;
      (inst.split == "train" ? train_ents : eval_ents).insert(m.id);
    }
    if (inst.split == "train") ++n_train;
    if (inst.split == "dev") ++n_dev;
    if (inst.split == "test") ++n_test;
  }
  for (const auto& [k, folds] : group_folds) {
    INFO("group ", k);
    CHECK(folds.size() == 1);
  }
  for (EntityId e : train_ents) CHECK(eval_ents.count(e) == 0);
  CHECK(n_train > 0);
  CHECK(n_dev > 0);
  CHECK(n_test > 0);
  // fractions within the documented 20% tolerance
  const double frac_train = static_cast<double>(n_train) / static_cast<double>(data.size());
  CHECK(frac_train > 0.5);
  CHECK(frac_train < 0.9);

  // dev/test have their train-only annotations stripped
  for (const auto& inst : data) {
    if (inst.split != "train") {
      CHECK(inst.head_label.empty());
      CHECK(inst.tail_label.empty());
      CHECK(inst.time_annotation == kUnboundYear);
    }
  }
}

TEST_CASE("verifier: clean dataset has zero violations; faults are localized") {
  TemporalKG kg = toy();
  SplitSpec split;
  split.seed = 13;
  auto data = generate_dataset(kg, builtin_templates(), split, 2000, nullptr);

  VerifyReport rep = verify_dataset(data, kg, builtin_templates());
  INFO("details: ", rep.details.empty() ? "" : rep.details.front());
  CHECK(rep.total() == 0);

  // fault 1: perturb one answer
  {
    auto faulty = data;
    for (auto& inst : faulty) {
      if (inst.answer_kind == AnswerKind::kTime && inst.answers.years.size() >= 1) {
        inst.answers.years[0] = inst.answers.years[0] == kg.y_min() ? kg.y_min() + 1
                                                                    : inst.answers.years[0] - 1;
        break;
      }
    }
    VerifyReport r2 = verify_dataset(faulty, kg, builtin_templates());
    CHECK(r2.answer_violations == 1);
    CHECK(r2.total() == 1);
    REQUIRE(!r2.details.empty());
    CHECK(r2.details.front().find("instance") != std::string::npos);
  }

  // fault 2: move one whole paraphrase group from train to test; the group
  // stays intact, so the only breach is the entity leak
  {
    auto faulty = data;
    std::string key;
    std::set<EntityId> moved;
    for (auto& inst : faulty) {
      if (inst.split == "train" && inst.qtype == ReasoningType::kFirstLast &&
          inst.entities.size() == 1 && !inst.entities[0].is_event) {
        key = paraphrase_group_key(inst);
        break;
      }
    }
    REQUIRE(!key.empty());
    for (auto& inst : faulty) {
      if (paraphrase_group_key(inst) == key) {
        inst.split = "test";
        inst.head_label.clear();
        inst.tail_label.clear();
        inst.time_annotation = kUnboundYear;
        moved.insert(inst.entities[0].id);
      }
    }
    REQUIRE(moved.size() == 1);
    VerifyReport r3 = verify_dataset(faulty, kg, builtin_templates());
    CHECK(r3.split_violations == 1);
    CHECK(r3.total() == 1);
  }
}

TEST_CASE("assign_splits reports infeasible entity graphs") {
  // a KG where every question mentions the same hub entity
  TemporalKG kg = kg_from(
      "a\tposition held\thub\t1990\t1991\n"
      "b\tposition held\thub\t1992\t1993\n"
      "c\tposition held\thub\t1994\t1995\n"
      "d\tposition held\thub\t1996\t1997\n");
  SplitSpec split;
  split.seed = 1;
  GenerationStats stats;
  CHECK_THROWS_WITH_AS(generate_dataset(kg, builtin_templates(), split, 200, &stats),
                       doctest::Contains("too connected"), std::runtime_error);
}
