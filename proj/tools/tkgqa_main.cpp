// tkgqa command line: KG tooling, embedding training, question generation,
// QA training/evaluation and the paper-style ablations.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tkgqa/embed_train.hpp"
#include "tkgqa/embedding.hpp"
#include "tkgqa/eval.hpp"
#include "tkgqa/kernels.hpp"
#include "tkgqa/parallel.hpp"
#include "tkgqa/qa_model.hpp"
#include "tkgqa/qgen.hpp"
#include "tkgqa/tkg.hpp"

namespace {

using nlohmann::ordered_json;
using namespace tkgqa;

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::fprintf(stderr, "[tkgqa] %s\n", msg.c_str());
}

void echo_config(const CLI::App* cmd) {
  if (g_log_level < 1) return;
  std::ostringstream os;
  os << "resolved config:";
  for (const auto* opt : cmd->get_options()) {
    if (opt->get_name() == "--help") continue;
    os << " " << opt->get_name() << "=";
    auto results = opt->results();
    if (results.empty()) {
      os << opt->get_default_str();
    } else {
      for (std::size_t i = 0; i < results.size(); ++i) os << (i ? "," : "") << results[i];
    }
  }
  log_info(os.str());
  log_info(std::string("kernel variant: ") + kernels::active().name);
}

std::vector<QAInstance> fold_of(const std::vector<QAInstance>& all, const std::string& split) {
  std::vector<QAInstance> out;
  for (const auto& i : all)
    if (i.split == split) out.push_back(i);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct QaTrainArgs {
  std::string kg_path, dataset_path, checkpoint_path, out_path, mode = "cronkgqa";
  QaModelConfig mcfg;
  QaTrainConfig tcfg;
};

QAModel run_qa_training(const QaTrainArgs& a, QaTrainResult* result_out) {
  TemporalKG kg = load_kg(a.kg_path);
  auto dataset = read_dataset(a.dataset_path, kg);
  auto ckpt = load_checkpoint(a.checkpoint_path);
  auto train_fold = fold_of(dataset, "train");
  auto dev_fold = fold_of(dataset, "dev");
  log_info("qa train: " + std::to_string(train_fold.size()) + " train / " +
           std::to_string(dev_fold.size()) + " dev instances");
  QAModel model = build_qa_model(ckpt.emb, qa_mode_from_name(a.mode), a.mcfg, train_fold);
  QaTrainResult res = train_qa(model, train_fold, dev_fold, kg, a.tcfg);
  log_info("qa train: best dev hits@10 " + std::to_string(res.best_dev_hits10) + " at epoch " +
           std::to_string(res.best_epoch));
  if (!a.out_path.empty()) {
    save_qa_model(model, kg, a.out_path);
    ordered_json log_j;
    log_j["mode"] = a.mode;
    log_j["seed"] = a.tcfg.seed;
    log_j["best_epoch"] = res.best_epoch;
    log_j["best_dev_hits10"] = res.best_dev_hits10;
    log_j["epochs"] = ordered_json::array();
    for (const auto& e : res.log)
      log_j["epochs"].push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"dev_hits10", e.dev_hits10}});
    write_text(a.out_path + ".log.json", log_j.dump(2) + "\n");
    log_info("wrote " + a.out_path);
  }
  if (result_out) *result_out = res;
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal KGQA toolkit"};
  app.set_config("--config", "", "read options from an INI/TOML config file");
  app.add_option("--log-level", g_log_level, "0=quiet 1=info 2=debug")->capture_default_str();
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = hardware; env TKGQA_THREADS overrides)")
      ->capture_default_str();
  app.require_subcommand(1);

  // ------------------------------------------------------------------- kg
  auto* kg_cmd = app.add_subcommand("kg", "temporal knowledge graph tools");
  kg_cmd->require_subcommand(1);

  auto* kg_gen = kg_cmd->add_subcommand("gen-toy", "generate the seeded synthetic KG");
  ToyKgParams toy;
  std::string kg_out = "kg.tsv";
  kg_gen->add_option("--seed", toy.seed, "RNG seed")->capture_default_str();
  kg_gen->add_option("--entities", toy.n_entities, "entity count")->capture_default_str();
  kg_gen->add_option("--relations", toy.n_relations, "relation count")->capture_default_str();
  kg_gen->add_option("--year-min", toy.year_min, "first year")->capture_default_str();
  kg_gen->add_option("--year-max", toy.year_max, "last year")->capture_default_str();
  kg_gen->add_option("--facts", toy.n_facts, "fact count")->capture_default_str();
  kg_gen->add_option("--out", kg_out, "output TSV path")->capture_default_str();

  auto* kg_stats = kg_cmd->add_subcommand("stats", "print KG statistics");
  std::string kg_in;
  kg_stats->add_option("--kg", kg_in, "facts TSV")->required();

  auto* kg_validate = kg_cmd->add_subcommand("validate", "load a KG and check invariants");
  std::string kg_val_in;
  kg_validate->add_option("--kg", kg_val_in, "facts TSV")->required();

  // ---------------------------------------------------------------- embed
  auto* embed_cmd = app.add_subcommand("embed", "KG embedding training and evaluation");
  embed_cmd->require_subcommand(1);

  auto* embed_train_cmd = embed_cmd->add_subcommand("train", "train embeddings");
  std::string et_kg, et_model = "tcomplex", et_out = "embeddings.ckpt";
  TrainConfig et_cfg;
  embed_train_cmd->add_option("--kg", et_kg, "facts TSV")->required();
  embed_train_cmd->add_option("--model", et_model, "complex|tcomplex|tntcomplex|timeplex")
      ->capture_default_str();
  embed_train_cmd->add_option("--dim", et_cfg.dim, "complex dimension D")->capture_default_str();
  embed_train_cmd->add_option("--lr", et_cfg.lr, "Adagrad learning rate")->capture_default_str();
  embed_train_cmd->add_option("--batch", et_cfg.batch_size, "batch size")->capture_default_str();
  embed_train_cmd->add_option("--epochs", et_cfg.epochs, "max epochs")->capture_default_str();
  embed_train_cmd->add_option("--patience", et_cfg.patience, "early-stopping patience")
      ->capture_default_str();
  embed_train_cmd->add_option("--n3", et_cfg.n3_weight, "N3 regularization weight")
      ->capture_default_str();
  embed_train_cmd->add_option("--smooth", et_cfg.temporal_smooth, "temporal smoothing weight")
      ->capture_default_str();
  embed_train_cmd->add_option("--seed", et_cfg.seed, "RNG seed")->capture_default_str();
  embed_train_cmd->add_option("--val-fraction", et_cfg.val_fraction, "validation fraction")
      ->capture_default_str();
  embed_train_cmd->add_option("--init-scale", et_cfg.init_scale, "init std")
      ->capture_default_str();
  embed_train_cmd->add_option("--max-expansion", et_cfg.max_expansion,
                              "cap per-fact year expansion (0 = full)")
      ->capture_default_str();
  embed_train_cmd->add_option("--alpha", et_cfg.timeplex.alpha, "timeplex alpha")
      ->capture_default_str();
  embed_train_cmd->add_option("--beta", et_cfg.timeplex.beta, "timeplex beta")
      ->capture_default_str();
  embed_train_cmd->add_option("--gamma", et_cfg.timeplex.gamma, "timeplex gamma")
      ->capture_default_str();
  embed_train_cmd->add_option("--out", et_out, "checkpoint path")->capture_default_str();

  auto* embed_eval_cmd = embed_cmd->add_subcommand("eval", "link-prediction validation");
  std::string ee_kg, ee_ckpt;
  embed_eval_cmd->add_option("--kg", ee_kg, "facts TSV")->required();
  embed_eval_cmd->add_option("--checkpoint", ee_ckpt, "checkpoint path")->required();

  // ----------------------------------------------------------------- qgen
  auto* qgen_cmd = app.add_subcommand("qgen", "question generation and verification");
  qgen_cmd->require_subcommand(1);

  auto* qg_templates = qgen_cmd->add_subcommand("templates", "dump the template catalog");
  std::string qt_out;
  qg_templates->add_option("--out", qt_out, "write JSON here instead of stdout");

  auto* qg_generate = qgen_cmd->add_subcommand("generate", "generate a QA dataset");
  std::string qg_kg, qg_out = "dataset.jsonl";
  std::size_t qg_count = 20000;
  SplitSpec qg_split;
  qg_generate->add_option("--kg", qg_kg, "facts TSV")->required();
  qg_generate->add_option("--count", qg_count, "target instance count")->capture_default_str();
  qg_generate->add_option("--train-frac", qg_split.train, "train fraction")
      ->capture_default_str();
  qg_generate->add_option("--dev-frac", qg_split.dev, "dev fraction")->capture_default_str();
  qg_generate->add_option("--test-frac", qg_split.test, "test fraction")->capture_default_str();
  qg_generate->add_option("--seed", qg_split.seed, "RNG seed")->capture_default_str();
  qg_generate->add_option("--out", qg_out, "output JSONL path")->capture_default_str();

  auto* qg_verify = qgen_cmd->add_subcommand("verify", "re-check answers and splits");
  std::string qv_kg, qv_dataset;
  qg_verify->add_option("--kg", qv_kg, "facts TSV")->required();
  qg_verify->add_option("--dataset", qv_dataset, "dataset JSONL")->required();

  // ------------------------------------------------------------------- qa
  auto* qa_cmd = app.add_subcommand("qa", "QA model training, evaluation, prediction");
  qa_cmd->require_subcommand(1);

  auto* qa_train_cmd = qa_cmd->add_subcommand("train", "train the QA model");
  QaTrainArgs qa_args;
  qa_train_cmd->add_option("--kg", qa_args.kg_path, "facts TSV")->required();
  qa_train_cmd->add_option("--dataset", qa_args.dataset_path, "dataset JSONL")->required();
  qa_train_cmd->add_option("--checkpoint", qa_args.checkpoint_path, "embedding checkpoint")
      ->required();
  qa_train_cmd->add_option("--mode", qa_args.mode, "cronkgqa|embedkgqa")->capture_default_str();
  qa_train_cmd->add_option("--d-model", qa_args.mcfg.d_model, "encoder width")
      ->capture_default_str();
  qa_train_cmd->add_option("--layers", qa_args.mcfg.n_layers, "encoder layers")
      ->capture_default_str();
  qa_train_cmd->add_option("--heads", qa_args.mcfg.n_heads, "attention heads")
      ->capture_default_str();
  qa_train_cmd->add_option("--ffn-mult", qa_args.mcfg.ffn_mult, "FFN width multiplier")
      ->capture_default_str();
  qa_train_cmd->add_option("--max-len", qa_args.mcfg.max_len, "max token length")
      ->capture_default_str();
  qa_train_cmd->add_option("--lr", qa_args.tcfg.lr, "Adam learning rate")->capture_default_str();
  qa_train_cmd->add_option("--batch", qa_args.tcfg.batch_size, "batch size")
      ->capture_default_str();
  qa_train_cmd->add_option("--epochs", qa_args.tcfg.epochs, "max epochs")->capture_default_str();
  qa_train_cmd->add_option("--patience", qa_args.tcfg.patience, "early-stopping patience")
      ->capture_default_str();
  qa_train_cmd->add_option("--seed", qa_args.tcfg.seed, "RNG seed")->capture_default_str();
  qa_train_cmd->add_option("--out", qa_args.out_path, "model output path")->required();

  auto* qa_eval_cmd = qa_cmd->add_subcommand("eval", "evaluate a trained model");
  std::string qe_kg, qe_dataset, qe_model, qe_split = "test", qe_report;
  qa_eval_cmd->add_option("--kg", qe_kg, "facts TSV")->required();
  qa_eval_cmd->add_option("--dataset", qe_dataset, "dataset JSONL")->required();
  qa_eval_cmd->add_option("--model", qe_model, "trained QA model")->required();
  qa_eval_cmd->add_option("--split", qe_split, "dev|test")->capture_default_str();
  qa_eval_cmd->add_option("--report", qe_report, "write the JSON report here");

  auto* qa_predict_cmd = qa_cmd->add_subcommand("predict", "top-k answers per question");
  std::string qp_kg, qp_dataset, qp_model, qp_split = "test";
  std::size_t qp_k = 10, qp_limit = 10;
  qa_predict_cmd->add_option("--kg", qp_kg, "facts TSV")->required();
  qa_predict_cmd->add_option("--dataset", qp_dataset, "dataset JSONL")->required();
  qa_predict_cmd->add_option("--model", qp_model, "trained QA model")->required();
  qa_predict_cmd->add_option("--split", qp_split, "dev|test|train")->capture_default_str();
  qa_predict_cmd->add_option("--k", qp_k, "answers per question")->capture_default_str();
  qa_predict_cmd->add_option("--limit", qp_limit, "instances to print (0 = all)")
      ->capture_default_str();

  // --------------------------------------------------------------- ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "paper-style analysis runs");
  ablate_cmd->require_subcommand(1);

  auto* ab_size = ablate_cmd->add_subcommand("size", "training-set size sweep");
  std::string as_kg, as_dataset, as_ckpt, as_out = "size_curve.csv";
  std::vector<double> as_fractions = {0.1, 0.3, 0.5, 1.0};
  QaTrainArgs as_args;
  ab_size->add_option("--kg", as_kg, "facts TSV")->required();
  ab_size->add_option("--dataset", as_dataset, "dataset JSONL")->required();
  ab_size->add_option("--checkpoint", as_ckpt, "tcomplex checkpoint")->required();
  ab_size->add_option("--fractions", as_fractions, "strictly increasing fractions in (0,1]")
      ->capture_default_str();
  ab_size->add_option("--seed", as_args.tcfg.seed, "RNG seed")->capture_default_str();
  ab_size->add_option("--d-model", as_args.mcfg.d_model, "encoder width")->capture_default_str();
  ab_size->add_option("--layers", as_args.mcfg.n_layers, "encoder layers")
      ->capture_default_str();
  ab_size->add_option("--epochs", as_args.tcfg.epochs, "max epochs")->capture_default_str();
  ab_size->add_option("--patience", as_args.tcfg.patience, "early-stopping patience")
      ->capture_default_str();
  ab_size->add_option("--out", as_out, "curve CSV path")->capture_default_str();

  auto* ab_cx = ablate_cmd->add_subcommand("cx-vs-tcx", "ComplEx vs TComplEx comparison");
  std::string ax_kg, ax_dataset, ax_cx_ckpt, ax_tcx_ckpt, ax_out = "cx_vs_tcx.json";
  QaTrainArgs ax_args;
  ab_cx->add_option("--kg", ax_kg, "facts TSV")->required();
  ab_cx->add_option("--dataset", ax_dataset, "dataset JSONL")->required();
  ab_cx->add_option("--cx-checkpoint", ax_cx_ckpt, "complex checkpoint")->required();
  ab_cx->add_option("--tcx-checkpoint", ax_tcx_ckpt, "tcomplex checkpoint")->required();
  ab_cx->add_option("--seed", ax_args.tcfg.seed, "RNG seed")->capture_default_str();
  ab_cx->add_option("--d-model", ax_args.mcfg.d_model, "encoder width")->capture_default_str();
  ab_cx->add_option("--layers", ax_args.mcfg.n_layers, "encoder layers")->capture_default_str();
  ab_cx->add_option("--epochs", ax_args.tcfg.epochs, "max epochs")->capture_default_str();
  ab_cx->add_option("--patience", ax_args.tcfg.patience, "early-stopping patience")
      ->capture_default_str();
  ab_cx->add_option("--out", ax_out, "paired report JSON path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    // ----------------------------------------------------------------- kg
    if (*kg_gen) {
      echo_config(kg_gen);
      TemporalKG kg = generate_toy_kg(toy);
      save_kg(kg, kg_out);
      log_info("wrote " + kg_out + " (" + std::to_string(kg.n_facts()) + " facts, " +
               std::to_string(kg.n_entities()) + " entities)");
    } else if (*kg_stats) {
      echo_config(kg_stats);
      TemporalKG kg = load_kg(kg_in);
      ordered_json j;
      j["facts"] = kg.n_facts();
      j["entities"] = kg.n_entities();
      j["relations"] = kg.n_relations();
      j["years"] = {kg.y_min(), kg.y_max()};
      j["event_facts"] = kg.event_fact_ids().size();
      j["duplicates_dropped"] = kg.duplicates_dropped();
      std::cout << j.dump(2) << "\n";
    } else if (*kg_validate) {
      echo_config(kg_validate);
      TemporalKG kg = load_kg(kg_val_in);
      // index consistency: the (s,r) partition must reproduce the fact list
      std::size_t indexed = 0;
      for (const auto& f : kg.facts()) {
        (void)f;
        ++indexed;
      }
      std::size_t via_index = 0;
      for (EntityId s = 0; s <= kg.n_entities(); ++s)
        via_index += kg.facts_of_subject(s).size();
      if (via_index != indexed) throw std::runtime_error("index/fact-list mismatch");
      std::printf("ok: %zu facts, %zu entities, %zu relations, years %d..%d\n", kg.n_facts(),
                  kg.n_entities(), kg.n_relations(), kg.y_min(), kg.y_max());
    }

    // -------------------------------------------------------------- embed
    else if (*embed_train_cmd) {
      echo_config(embed_train_cmd);
      et_cfg.threads = threads;
      TemporalKG kg = load_kg(et_kg);
      const ModelTag tag = model_tag_from_name(et_model);
      TrainResult res = train_embeddings(kg, tag, et_cfg);
      ordered_json meta;
      meta["model"] = et_model;
      meta["dim"] = et_cfg.dim;
      meta["seed"] = et_cfg.seed;
      meta["lr"] = et_cfg.lr;
      meta["batch"] = et_cfg.batch_size;
      meta["epochs"] = et_cfg.epochs;
      meta["patience"] = et_cfg.patience;
      meta["n3_weight"] = et_cfg.n3_weight;
      meta["temporal_smooth"] = et_cfg.temporal_smooth;
      meta["val_fraction"] = et_cfg.val_fraction;
      meta["init_scale"] = et_cfg.init_scale;
      meta["max_expansion"] = et_cfg.max_expansion;
      meta["best_epoch"] = res.best_epoch;
      meta["best_val_mrr"] = res.best_val_mrr;
      meta["kg"] = {{"facts", kg.n_facts()},
                    {"entities", kg.n_entities()},
                    {"relations", kg.n_relations()},
                    {"y_min", kg.y_min()},
                    {"y_max", kg.y_max()}};
      save_checkpoint(res.emb, meta, et_out);
      log_info("wrote " + et_out + "; best val MRR " + std::to_string(res.best_val_mrr));
    } else if (*embed_eval_cmd) {
      echo_config(embed_eval_cmd);
      TemporalKG kg = load_kg(ee_kg);
      LoadedCheckpoint ckpt = load_checkpoint(ee_ckpt);
      TrainConfig cfg;
      if (!ckpt.meta.is_null()) {
        cfg.seed = ckpt.meta.value("seed", 0);
        cfg.val_fraction = ckpt.meta.value("val_fraction", 0.05);
        cfg.max_expansion = ckpt.meta.value("max_expansion", 0);
      }
      TupleSplit split = make_tuple_split(kg, ckpt.emb.tag, cfg);
      std::vector<Quad> all = split.train;
      all.insert(all.end(), split.val.begin(), split.val.end());
      KgcMetrics m = kgc_eval(ckpt.emb, split.val, TupleFilter(all), threads);
      ordered_json j;
      j["queries"] = m.n_queries;
      j["mrr"] = m.mrr;
      j["hits1"] = m.hits1;
      j["hits10"] = m.hits10;
      std::cout << j.dump(2) << "\n";
    }

    // --------------------------------------------------------------- qgen
    else if (*qg_templates) {
      echo_config(qg_templates);
      ordered_json j = ordered_json::array();
      for (const auto& t : builtin_templates())
        j.push_back({{"seed_id", t.seed_id},
                     {"paraphrase_id", t.paraphrase_id},
                     {"text", t.text},
                     {"qtype", reasoning_type_name(t.qtype)},
                     {"relation", t.relation},
                     {"answer_kind", answer_kind_name(t.answer_kind)}});
      if (qt_out.empty())
        std::cout << j.dump(2) << "\n";
      else
        write_text(qt_out, j.dump(2) + "\n");
    } else if (*qg_generate) {
      echo_config(qg_generate);
      TemporalKG kg = load_kg(qg_kg);
      GenerationStats stats;
      auto data = generate_dataset(kg, builtin_templates(), qg_split, qg_count, &stats);
      write_dataset(data, qg_out);
      std::ostringstream os;
      os << "generated " << stats.generated << "/" << stats.requested << " instances (";
      for (int t = 0; t < 5; ++t)
        os << reasoning_type_name(static_cast<ReasoningType>(t)) << "=" << stats.per_type[t]
           << (t < 4 ? " " : ")");
      log_info(os.str());
      for (const auto& s : stats.skipped_templates) log_info("skipped seed: " + s);
      log_info("wrote " + qg_out);
    } else if (*qg_verify) {
      echo_config(qg_verify);
      TemporalKG kg = load_kg(qv_kg);
      auto data = read_dataset(qv_dataset, kg);
      VerifyReport rep = verify_dataset(data, kg, builtin_templates(), threads);
      std::printf("%zu violations (%zu answer, %zu split, %zu annotation) over %zu instances\n",
                  rep.total(), rep.answer_violations, rep.split_violations,
                  rep.annotation_violations, rep.n_instances);
      for (const auto& d : rep.details) std::printf("  %s\n", d.c_str());
      if (!rep.ok()) return 1;
    }

    // ----------------------------------------------------------------- qa
    else if (*qa_train_cmd) {
      echo_config(qa_train_cmd);
      qa_args.tcfg.threads = threads;
      qa_args.mcfg.seed = qa_args.tcfg.seed;
      run_qa_training(qa_args, nullptr);
    } else if (*qa_eval_cmd) {
      echo_config(qa_eval_cmd);
      TemporalKG kg = load_kg(qe_kg);
      auto data = read_dataset(qe_dataset, kg);
      QAModel model = load_qa_model(qe_model);
      auto fold = fold_of(data, qe_split);
      ordered_json cfgj;
      cfgj["model"] = qe_model;
      cfgj["dataset"] = qe_dataset;
      cfgj["split"] = qe_split;
      EvalReport rep =
          stratified_eval(model, fold, kg, qe_split, fingerprint_json(cfgj), threads);
      std::cout << report_table(rep);
      if (!qe_report.empty()) {
        write_text(qe_report, report_to_json(rep).dump(2) + "\n");
        log_info("wrote " + qe_report);
      }
    } else if (*qa_predict_cmd) {
      echo_config(qa_predict_cmd);
      TemporalKG kg = load_kg(qp_kg);
      auto data = read_dataset(qp_dataset, kg);
      QAModel model = load_qa_model(qp_model);
      auto fold = fold_of(data, qp_split);
      const std::size_t limit = qp_limit == 0 ? fold.size() : std::min(qp_limit, fold.size());
      for (std::size_t i = 0; i < limit; ++i) {
        auto ranked = predict_topk(model, fold[i], kg, qp_k);
        ordered_json j;
        j["question"] = fold[i].question;
        j["predictions"] = ordered_json::array();
        for (const auto& r : ranked)
          j["predictions"].push_back(
              {{"answer", r.label}, {"kind", r.is_entity ? "entity" : "time"}, {"prob", r.prob}});
        std::cout << j.dump() << "\n";
      }
    }

    // ------------------------------------------------------------- ablate
    else if (*ab_size) {
      echo_config(ab_size);
      as_args.tcfg.threads = threads;
      as_args.mcfg.seed = as_args.tcfg.seed;
      TemporalKG kg = load_kg(as_kg);
      auto data = read_dataset(as_dataset, kg);
      auto ckpt = load_checkpoint(as_ckpt);
      auto train_fold = fold_of(data, "train");
      auto dev_fold = fold_of(data, "dev");
      auto test_fold = fold_of(data, "test");
      ordered_json cfgj;
      cfgj["seed"] = as_args.tcfg.seed;
      cfgj["fractions"] = as_fractions;
      const std::string fp = fingerprint_json(cfgj);
      auto curve = size_ablation(
          as_fractions, train_fold, as_args.tcfg.seed,
          [&](const std::vector<QAInstance>& subset) {
            QAModel model =
                build_qa_model(ckpt.emb, QaMode::kCronKgqa, as_args.mcfg, subset);
            train_qa(model, subset, dev_fold, kg, as_args.tcfg);
            return stratified_eval(model, test_fold, kg, "test", fp, threads);
          });
      write_text(as_out, ablation_csv(curve));
      log_info("wrote " + as_out);
    } else if (*ab_cx) {
      echo_config(ab_cx);
      ax_args.tcfg.threads = threads;
      ax_args.mcfg.seed = ax_args.tcfg.seed;
      TemporalKG kg = load_kg(ax_kg);
      auto data = read_dataset(ax_dataset, kg);
      auto cx_ckpt = load_checkpoint(ax_cx_ckpt);
      auto tcx_ckpt = load_checkpoint(ax_tcx_ckpt);
      auto train_fold = fold_of(data, "train");
      auto dev_fold = fold_of(data, "dev");
      auto test_fold = fold_of(data, "test");
      QAModel cx_model = build_qa_model(cx_ckpt.emb, QaMode::kEmbedKgqa, ax_args.mcfg, train_fold);
      train_qa(cx_model, train_fold, dev_fold, kg, ax_args.tcfg);
      QAModel tcx_model =
          build_qa_model(tcx_ckpt.emb, QaMode::kCronKgqa, ax_args.mcfg, train_fold);
      train_qa(tcx_model, train_fold, dev_fold, kg, ax_args.tcfg);
      ordered_json cfgj;
      cfgj["seed"] = ax_args.tcfg.seed;
      cfgj["cx"] = ax_cx_ckpt;
      cfgj["tcx"] = ax_tcx_ckpt;
      CxVsTcxReport rep =
          cx_vs_tcx(cx_model, tcx_model, test_fold, kg, fingerprint_json(cfgj), threads);
      write_text(ax_out, cx_vs_tcx_json(rep).dump(2) + "\n");
      std::cout << "cx  " << report_table(rep.cx);
      std::cout << "tcx " << report_table(rep.tcx);
      log_info("wrote " + ax_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
