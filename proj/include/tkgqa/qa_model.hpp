#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tkgqa/embedding.hpp"
#include "tkgqa/encoder.hpp"
#include "tkgqa/qgen.hpp"
#include "tkgqa/tkg.hpp"

namespace tkgqa {

enum class QaMode : std::uint8_t { kCronKgqa = 0, kEmbedKgqa = 1 };

std::string qa_mode_name(QaMode m);
QaMode qa_mode_from_name(const std::string& s);

struct AnchorSet {
  EntityId subject = kDummyEntity;
  EntityId object = kDummyEntity;
  TimestampId time = kDummyTime;

  bool operator==(const AnchorSet&) const = default;
};

// subject = first annotated entity by span order, object = second if
// present, time = first annotated time; DUMMY otherwise
AnchorSet extract_anchors(const QAInstance& inst, const TemporalKG& kg);

// ------------------------------------------------------------------ vocab
struct Vocab {
  std::vector<std::string> tokens;  // [0]=<pad> [1]=<cls> [2]=<unk> [3]=<ent> [4]=<time>
  std::unordered_map<std::string, int> ids;

  static constexpr int kPad = 0, kCls = 1, kUnk = 2, kEntMarker = 3, kTimeMarker = 4;

  int id(const std::string& tok) const {
    auto it = ids.find(tok);
    return it == ids.end() ? kUnk : it->second;
  }
  std::size_t size() const { return tokens.size(); }
  std::string fnv_hash_hex() const;

  static Vocab build(const std::vector<QAInstance>& train_instances);
  static Vocab from_tokens(std::vector<std::string> toks);
};

// mention-aware tokenization: entity/time mentions become a type marker
// token followed by the mention token; leading <cls> is the pooling slot
std::vector<int> tokenize_instance(const QAInstance& inst, const Vocab& vocab,
                                   std::size_t max_len);

// ------------------------------------------------------------------ model
struct QaModelConfig {
  std::size_t d_model = 128;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t ffn_mult = 4;
  std::size_t max_len = 32;
  std::uint64_t seed = 0;
};

struct QAModel {
  QaMode mode = QaMode::kCronKgqa;
  EmbeddingSet emb;  // frozen KG tables (DUMMY rows learnable; timestamps
                     // learnable in embedkgqa mode, all learnable when unfrozen)
  Encoder encoder;
  Tensor w_ent, b_ent;    // (2D x d_m), (1 x 2D)
  Tensor w_time, b_time;
  Vocab vocab;
  QaModelConfig cfg;
  bool unfreeze_tables = false;

  std::size_t n_entities() const { return emb.entities.rows - 1; }
  std::size_t n_timestamps() const { return emb.timestamps.rows - 1; }
  std::size_t n_answer_slots() const { return n_entities() + n_timestamps(); }
};

// cronkgqa requires a tcomplex checkpoint; embedkgqa requires complex (its
// timestamp table becomes learnable, per the EmbedKGQA adaptation)
QAModel build_qa_model(const EmbeddingSet& emb, QaMode mode, const QaModelConfig& cfg,
                       const std::vector<QAInstance>& train_fold);

struct QaForward {
  AnchorSet anchors;
  std::vector<int> tokens;
  std::vector<double> qe_ent, qe_time;  // 2D each
  std::vector<double> probs;            // n_answer_slots()
};

// probability vector over the combined entity+timestamp answer space
QaForward qa_forward(const QAModel& model, const QAInstance& inst, const TemporalKG& kg);

// slot helpers: slot < n_entities maps to entity id slot+1, otherwise to
// timestamp id slot - n_entities + 1
std::vector<std::size_t> gold_slots(const QAModel& model, const QAInstance& inst,
                                    const TemporalKG& kg);

struct RankedAnswer {
  std::string label;  // entity label or year digits
  bool is_entity = true;
  double prob = 0.0;
};

// top-k by probability, ties broken by ascending slot id
std::vector<RankedAnswer> predict_topk(const QAModel& model, const QAInstance& inst,
                                       const TemporalKG& kg, std::size_t k);

// ------------------------------------------------------------------- io
// model file = embedding core + encoder/projection tensors + JSON metadata
void save_qa_model(const QAModel& model, const TemporalKG& kg, const std::string& path);
QAModel load_qa_model(const std::string& path);

// ---------------------------------------------------------------- training
struct QaTrainConfig {
  double lr = 1e-3;  // Adam
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  std::size_t batch_size = 128;
  int epochs = 60;
  int patience = 10;  // epochs without dev hits@10 improvement
  std::uint64_t seed = 0;
  int threads = 0;
  bool sample_one_gold = false;  // default: soft target uniform over golds

  void validate() const;
};

struct QaEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double dev_hits10 = 0.0;
};

struct QaTrainResult {
  std::vector<QaEpochLog> log;
  int best_epoch = 0;
  double best_dev_hits10 = 0.0;
};

QaTrainResult train_qa(QAModel& model, const std::vector<QAInstance>& train_fold,
                       const std::vector<QAInstance>& dev_fold, const TemporalKG& kg,
                       const QaTrainConfig& cfg);

// cross-entropy of the batch at the current parameters (for gradient checks)
double qa_batch_loss(const QAModel& model, const std::vector<QAInstance>& batch,
                     const TemporalKG& kg, bool sample_one_gold = false);

// analytic gradient of qa_batch_loss, same code path training uses
struct QaLossGrads {
  EncoderParams enc;
  Tensor w_ent, b_ent, w_time, b_time;
  ComplexTable ent_rows, ts_rows;
};
QaLossGrads qa_batch_loss_grads(const QAModel& model, const std::vector<QAInstance>& batch,
                                const TemporalKG& kg);

}  // namespace tkgqa
