#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "tkgqa/embed_train.hpp"
#include "tkgqa/rng.hpp"

using namespace tkgqa;

namespace {

TemporalKG small_kg(std::uint64_t seed = 7) {
  ToyKgParams p;
  p.seed = seed;
  p.n_entities = 60;
  p.n_relations = 5;
  p.year_min = 1990;
  p.year_max = 2010;
  p.n_facts = 500;
  return generate_toy_kg(p);
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double table_sq_norm(const ComplexTable& t) {
  double s = 0;
  for (double x : t.re) s += x * x;
  for (double x : t.im) s += x * x;
  return s;
}

}  // namespace

TEST_CASE("expand_facts enumerates interval years") {
  const std::string p = tmp_path("ef.tsv");
  {
    std::ofstream out(p);
    out << "A\tr\tB\t2000\t2002\nC\tr\tD\t1999\t1999\n";
  }
  TemporalKG kg = load_kg(p);
  auto quads = expand_facts(kg);
  REQUIRE(quads.size() == 4);  // 3 + 1
  CHECK(quads[0].t == kg.timestamp_of_year(2000));
  CHECK(quads[1].t == kg.timestamp_of_year(2001));
  CHECK(quads[2].t == kg.timestamp_of_year(2002));
  CHECK(quads[3].s == kg.entity_id("C"));
  std::remove(p.c_str());

  // tuple count equals the sum of interval lengths on the toy KG
  TemporalKG toy = small_kg();
  std::size_t want = 0;
  for (const auto& f : toy.facts()) want += static_cast<std::size_t>(f.end - f.start + 1);
  CHECK(expand_facts(toy).size() == want);
}

TEST_CASE("training tuples contain reciprocals pairwise") {
  TemporalKG kg = small_kg();
  TrainConfig cfg;
  auto tuples = build_training_tuples(kg, ModelTag::kTComplex, cfg);
  const std::uint32_t R = static_cast<std::uint32_t>(kg.n_relations());
  REQUIRE(tuples.size() % 2 == 0);
  std::set<std::tuple<EntityId, std::uint32_t, EntityId, TimestampId>> seen;
  for (const auto& q : tuples) seen.insert({q.s, q.rel_row, q.o, q.t});
  for (const auto& q : tuples) {
    const std::uint32_t rr = q.rel_row < R ? q.rel_row + R : q.rel_row - R;
    CHECK(seen.count({q.o, rr, q.s, q.t}) == 1);
  }
}

TEST_CASE("max_expansion caps per-fact years") {
  TemporalKG kg = small_kg();
  auto full = expand_facts(kg, 0, 7);
  auto capped = expand_facts(kg, 2, 7);
  CHECK(capped.size() <= full.size());
  for (const auto& f : kg.facts()) (void)f;
  // per fact at most 2 tuples
  std::map<std::tuple<EntityId, std::uint32_t, EntityId>, std::set<TimestampId>> per;
  for (const auto& q : capped) per[{q.s, q.rel_row, q.o}].insert(q.t);
  for (const auto& [k, v] : per) CHECK(v.size() <= 2 * 4);  // multiple facts can share (s,r,o)
}

TEST_CASE("checkpoint round trip is bitwise and corrupt files are rejected") {
  EmbeddingSet emb = init_embeddings(ModelTag::kTComplex, 20, 3, 10, 8, 99, 0.1);
  const std::string p = tmp_path("emb.ckpt");
  nlohmann::ordered_json meta;
  meta["seed"] = 99;
  save_checkpoint(emb, meta, p);

  LoadedCheckpoint lc = load_checkpoint(p);
  CHECK(lc.emb.tag == emb.tag);
  CHECK(lc.emb.dim == emb.dim);
  CHECK(lc.emb.n_relations == emb.n_relations);
  CHECK(lc.emb.entities.re == emb.entities.re);
  CHECK(lc.emb.entities.im == emb.entities.im);
  CHECK(lc.emb.relations.re == emb.relations.re);
  CHECK(lc.emb.timestamps.im == emb.timestamps.im);
  CHECK(lc.meta["seed"] == 99);

  // save -> load -> save gives identical bytes
  const std::string p2 = tmp_path("emb2.ckpt");
  save_checkpoint(lc.emb, meta, p2);
  CHECK(slurp(p) == slurp(p2));

  // file length = 25-byte header + 16 * D * total rows
  const std::size_t rows = emb.entities.rows + emb.relations.rows + emb.timestamps.rows;
  CHECK(std::filesystem::file_size(p) == 25 + 16 * emb.dim * rows);

  // corrupted magic
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(p), doctest::Contains("magic"), std::runtime_error);

  // truncated payload
  save_checkpoint(emb, meta, p);
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 16);
  CHECK_THROWS_WITH_AS(load_checkpoint(p), doctest::Contains("truncated"), std::runtime_error);

  std::remove(p.c_str());
  std::remove((p + ".meta.json").c_str());
  std::remove(p2.c_str());
  std::remove((p2 + ".meta.json").c_str());
}

TEST_CASE("kgc_eval basics: perfect scores, monotonicity, random baseline") {
  TemporalKG kg = small_kg();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.seed = 5;
  TupleSplit split = make_tuple_split(kg, ModelTag::kTComplex, cfg);
  std::vector<Quad> all = split.train;
  all.insert(all.end(), split.val.begin(), split.val.end());
  TupleFilter filter(all);

  // random embeddings: MRR should be near the analytic uniform-rank mean
  EmbeddingSet emb = init_embeddings(ModelTag::kTComplex, kg.n_entities(), kg.n_relations(),
                                     kg.n_years(), 8, 123, 0.1);
  std::vector<Quad> queries(split.val.begin(),
                            split.val.begin() + std::min<std::size_t>(1000, split.val.size()));
  KgcMetrics m = kgc_eval(emb, queries, filter, 0, false);
  CHECK(m.hits10 >= m.hits1);

  const double n = static_cast<double>(kg.n_entities());
  double harmonic = 0;
  for (std::size_t i = 1; i <= kg.n_entities(); ++i) harmonic += 1.0 / static_cast<double>(i);
  const double expected_mrr = harmonic / n;
  // E[1/rank] under uniform ranks; 3 sigma with sigma ~ sqrt(E[X^2]/n_q)
  const double sigma = std::sqrt(1.0 / static_cast<double>(queries.size()));
  INFO("mrr=", m.mrr, " expected=", expected_mrr);
  CHECK(std::abs(m.mrr - expected_mrr) <= 3.0 * sigma * 0.3 + 0.02);

  // filtered ranks never exceed unfiltered ranks
  KgcMetrics mf = kgc_eval(emb, queries, filter, 0, true);
  CHECK(mf.mrr >= m.mrr - 1e-12);
}

TEST_CASE("training improves held-out MRR well beyond the random baseline") {
  TemporalKG kg = small_kg();
  TrainConfig cfg;
  cfg.dim = 32;
  cfg.seed = 7;
  cfg.epochs = 40;
  cfg.patience = 8;
  TrainResult res = train_embeddings(kg, ModelTag::kTComplex, cfg);
  REQUIRE(!res.log.empty());

  double harmonic = 0;
  for (std::size_t i = 1; i <= kg.n_entities(); ++i) harmonic += 1.0 / static_cast<double>(i);
  const double random_mrr = harmonic / static_cast<double>(kg.n_entities());
  INFO("best val MRR ", res.best_val_mrr, " vs random ", random_mrr);
  CHECK(res.best_val_mrr >= 3.0 * random_mrr);
  CHECK(res.emb.finite());
}

TEST_CASE("first-epoch loss is non-increasing at small lr (3 seed retries)") {
  TemporalKG kg = small_kg();
  int passes = 0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    TrainConfig cfg;
    cfg.dim = 16;
    cfg.seed = seed;
    cfg.lr = 0.01;
    cfg.epochs = 2;
    cfg.patience = 2;
    TrainConfig probe = cfg;
    // loss before any update vs after the first epoch
    TupleSplit split = make_tuple_split(kg, ModelTag::kTComplex, probe);
    EmbeddingSet init = init_embeddings(ModelTag::kTComplex, kg.n_entities(), kg.n_relations(),
                                        kg.n_years(), cfg.dim, cfg.seed, cfg.init_scale);
    const double before = dataset_loss(init, split.train, probe);
    TrainResult res = train_embeddings(kg, ModelTag::kTComplex, cfg);
    const double after = dataset_loss(res.emb, split.train, probe);
    if (after <= before) ++passes;
  }
  CHECK(passes >= 1);
}

TEST_CASE("gigantic N3 weight shrinks embedding norms monotonically") {
  TemporalKG kg = small_kg();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.seed = 3;
  cfg.epochs = 4;
  cfg.patience = 10;
  cfg.n3_weight = 1e6;

  // track the norm across manual epochs by re-training with more epochs
  std::vector<double> norms;
  for (int epochs : {1, 2, 3, 4}) {
    TrainConfig c2 = cfg;
    c2.epochs = epochs;
    c2.patience = epochs + 1;
    TrainResult r = train_embeddings(kg, ModelTag::kTComplex, c2);
    // early stopping keeps the best-MRR epoch; with these settings every
    // epoch runs, so take the final tables
    norms.push_back(table_sq_norm(r.emb.entities));
  }
  // the sequence of final norms after 1..4 epochs of heavy regularization
  for (std::size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] <= norms[i - 1] * 1.001);
}

TEST_CASE("same seed gives byte-identical checkpoints") {
  TemporalKG kg = small_kg();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.seed = 21;
  cfg.epochs = 3;
  cfg.patience = 5;
  TrainResult a = train_embeddings(kg, ModelTag::kTComplex, cfg);
  TrainResult b = train_embeddings(kg, ModelTag::kTComplex, cfg);
  const std::string pa = tmp_path("det_a.ckpt"), pb = tmp_path("det_b.ckpt");
  save_checkpoint(a.emb, {}, pa);
  save_checkpoint(b.emb, {}, pb);
  CHECK(slurp(pa) == slurp(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());
  std::remove((pa + ".meta.json").c_str());
  std::remove((pb + ".meta.json").c_str());
}

TEST_CASE("batch loss gradients match finite differences for every model") {
  TemporalKG kg = small_kg();
  for (ModelTag tag : {ModelTag::kComplex, ModelTag::kTComplex, ModelTag::kTNTComplex,
                       ModelTag::kTimePlex}) {
    INFO("model ", model_tag_name(tag));
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.seed = 17;
    cfg.n3_weight = 1e-2;
    cfg.temporal_smooth = 1e-2;
    EmbeddingSet emb = init_embeddings(tag, kg.n_entities(), kg.n_relations(), kg.n_years(),
                                       cfg.dim, cfg.seed, cfg.init_scale);
    auto tuples = build_training_tuples(kg, tag, cfg);
    tuples.resize(6);

    DatasetGrads grads = dataset_loss_grads(emb, tuples, cfg);
    auto loss = [&] { return dataset_loss(emb, tuples, cfg); };
    const double h = 1e-6;
    Rng rng(5);
    auto check_coord = [&](std::vector<double>& plane, std::size_t idx, double analytic) {
      const double saved = plane[idx];
      plane[idx] = saved + h;
      const double fp = loss();
      plane[idx] = saved - h;
      const double fm = loss();
      plane[idx] = saved;
      const double fd = (fp - fm) / (2 * h);
      const double err =
          std::abs(fd - analytic) / std::max({1e-7, std::abs(fd), std::abs(analytic)});
      INFO("idx=", idx, " fd=", fd, " analytic=", analytic);
      CHECK(err < 2e-3);
    };

    // rows touched by the mini-batch, sampled coordinates
    for (int rep = 0; rep < 25; ++rep) {
      std::size_t idx = rng.uniform_u64(emb.entities.re.size());
      check_coord(emb.entities.re, idx, grads.ent.re[idx]);
      check_coord(emb.entities.im, idx, grads.ent.im[idx]);
      idx = rng.uniform_u64(emb.relations.re.size());
      check_coord(emb.relations.re, idx, grads.rel.re[idx]);
      idx = rng.uniform_u64(emb.timestamps.re.size());
      check_coord(emb.timestamps.re, idx, grads.ts.re[idx]);
      check_coord(emb.timestamps.im, idx, grads.ts.im[idx]);
    }
  }
}
