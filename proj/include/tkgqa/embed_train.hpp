#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "tkgqa/embedding.hpp"
#include "tkgqa/tkg.hpp"

namespace tkgqa {

// One training instance: a per-year point tuple. rel_row is in [0, 2R):
// forward relations occupy [0, R), reciprocals [R, 2R). For multi-part
// models the extra parts live at fixed offsets of 2R (see EmbeddingSet).
struct Quad {
  EntityId s = 0;
  std::uint32_t rel_row = 0;
  EntityId o = 0;
  TimestampId t = 0;

  bool operator==(const Quad&) const = default;
};

struct TrainConfig {
  std::size_t dim = 32;            // complex dimension D
  double lr = 0.1;                 // Adagrad step size
  std::size_t batch_size = 256;
  int epochs = 200;                // upper bound; early stopping usually fires
  int patience = 10;               // epochs without val-MRR improvement
  double n3_weight = 1e-2;         // lambda, cubed-magnitude regularizer
  double temporal_smooth = 1e-2;   // lambda_T, ||w_{t+1}-w_t||^2 smoothing
  std::uint64_t seed = 0;
  double val_fraction = 0.05;
  double init_scale = 0.1;
  int threads = 0;                 // 0 = hardware count (TKGQA_THREADS overrides)
  std::size_t max_expansion = 0;   // 0 = full per-year expansion, else sample K years
  double adagrad_eps = 1e-10;
  TimeplexWeights timeplex;

  void validate() const;
};

// forward per-year tuples, one per year of each fact's interval, in
// (fact index, year) order
std::vector<Quad> expand_facts(const TemporalKG& kg, std::size_t max_expansion = 0,
                               std::uint64_t sample_seed = 0);

// forward tuples plus reciprocals, interleaved pairwise; deduplicated on
// (s, rel_row, o) for the time-agnostic complex model
std::vector<Quad> build_training_tuples(const TemporalKG& kg, ModelTag tag,
                                        const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double val_mrr = 0.0;
};

struct TrainResult {
  EmbeddingSet emb;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_mrr = 0.0;
};

// deterministic train/validation tuple split (shared by train and eval)
struct TupleSplit {
  std::vector<Quad> train, val;
};
TupleSplit make_tuple_split(const TemporalKG& kg, ModelTag tag, const TrainConfig& cfg);

TrainResult train_embeddings(const TemporalKG& kg, ModelTag tag, const TrainConfig& cfg);

struct KgcMetrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  std::size_t n_queries = 0;
};

// Filtered object ranking: candidates known true for (s, rel_row, ., t) in
// `all_tuples` are removed (except the gold object itself).
class TupleFilter {
 public:
  explicit TupleFilter(const std::vector<Quad>& all_tuples);
  bool contains(EntityId s, std::uint32_t rel_row, EntityId o, TimestampId t) const;

 private:
  std::unordered_set<std::uint64_t> keys_;
};

KgcMetrics kgc_eval(const EmbeddingSet& emb, const std::vector<Quad>& held_out,
                    const TupleFilter& filter, int threads = 0, bool filtered = true,
                    const TimeplexWeights& tw = {});

// Candidate coefficient vector c with score(e) = Re(sum_d c_d * conj(u_e_d));
// shared by training, evaluation and tests.
ComplexVec object_prediction_coeffs(const EmbeddingSet& emb, const Quad& q,
                                    const TimeplexWeights& w = {});

// Full multiclass objective over a tuple list at the current tables
// (cross entropy + N3 + smoothing), used by gradient-check tests.
double dataset_loss(const EmbeddingSet& emb, const std::vector<Quad>& tuples,
                    const TrainConfig& cfg);

// analytic gradient of dataset_loss, same code path training uses
struct DatasetGrads {
  ComplexTable ent, rel, ts;
};
DatasetGrads dataset_loss_grads(const EmbeddingSet& emb, const std::vector<Quad>& tuples,
                                const TrainConfig& cfg);

}  // namespace tkgqa
