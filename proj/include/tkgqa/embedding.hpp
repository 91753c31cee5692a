#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tkgqa/complex_ops.hpp"

namespace tkgqa {

// Embedding tables for one model. Row 0 of the entity and timestamp tables
// is the learnable DUMMY placeholder. Relation rows include reciprocals:
//   complex/tcomplex : [0,R) forward, [R,2R) reciprocal
//   tntcomplex       : time-sensitive fwd/rec in [0,2R), static in [2R,4R)
//   timeplex         : SO pair in [0,2R), ST in [2R,4R), OT in [4R,6R)
struct EmbeddingSet {
  ModelTag tag = ModelTag::kComplex;
  std::uint32_t dim = 0;
  std::uint32_t n_relations = 0;  // external relation count R
  ComplexTable entities;          // (|E|+1) x dim
  ComplexTable relations;         // rows per tag layout
  ComplexTable timestamps;        // (|T|+1) x dim

  static std::uint32_t relation_row_multiplier(ModelTag tag);

  std::size_t rel_forward(std::size_t r, std::size_t part = 0) const {
    return 2 * part * n_relations + r;
  }
  std::size_t rel_reciprocal(std::size_t r, std::size_t part = 0) const {
    return (2 * part + 1) * n_relations + r;
  }

  bool finite() const;
};

EmbeddingSet init_embeddings(ModelTag tag, std::size_t n_entities, std::size_t n_relations,
                             std::size_t n_years, std::size_t dim, std::uint64_t seed,
                             double init_scale);

// Binary checkpoint: magic "TKGE", version u32, model tag u8, dim u32,
// row counts (entities, relation rows, timestamps) u32 each, then
// little-endian f64 planes in order entity re, entity im, relation re,
// relation im, timestamp re, timestamp im. A JSON sidecar
// "<path>.meta.json" carries vocabularies and the training config.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const EmbeddingSet& emb, const nlohmann::ordered_json& meta,
                     const std::string& path);

struct LoadedCheckpoint {
  EmbeddingSet emb;
  nlohmann::json meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// stream-level primitives shared with the QA model file format
void write_embedding_core(std::ostream& out, const EmbeddingSet& emb);
EmbeddingSet read_embedding_core(std::istream& in, const std::string& path);

}  // namespace tkgqa
