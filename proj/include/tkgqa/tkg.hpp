#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace tkgqa {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using TimestampId = std::uint32_t;

// id 0 of the entity and timestamp vocabularies is reserved for the DUMMY
// placeholder used by QA; it never appears in a fact.
inline constexpr EntityId kDummyEntity = 0;
inline constexpr TimestampId kDummyTime = 0;
inline constexpr const char* kDummyLabel = "<dummy>";
inline constexpr const char* kEventRelationLabel = "significant event";

struct TemporalFact {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;
  int start = 0;  // inclusive years
  int end = 0;
  bool is_event = false;

  bool operator==(const TemporalFact&) const = default;
};

class TemporalKG {
 public:
  TemporalKG() = default;

  // Builds vocabulary ids in first-appearance order (entities and relations
  // start at 1; 0 is DUMMY). Throws std::runtime_error on invariant
  // violations.
  static TemporalKG build(const std::vector<std::array<std::string, 3>>& spo_labels,
                          const std::vector<std::array<int, 2>>& intervals,
                          const std::vector<bool>& event_flags);

  const std::vector<TemporalFact>& facts() const { return facts_; }
  std::size_t n_facts() const { return facts_.size(); }

  // counts exclude the DUMMY slot
  std::size_t n_entities() const { return entity_labels_.size() - 1; }
  std::size_t n_relations() const { return relation_labels_.size(); }
  std::size_t n_years() const { return static_cast<std::size_t>(y_max_ - y_min_ + 1); }

  int y_min() const { return y_min_; }
  int y_max() const { return y_max_; }

  TimestampId timestamp_of_year(int year) const;
  int year_of_timestamp(TimestampId t) const;

  const std::string& entity_label(EntityId e) const { return entity_labels_.at(e); }
  const std::string& relation_label(RelationId r) const { return relation_labels_.at(r); }
  EntityId entity_id(const std::string& label) const;
  RelationId relation_id(const std::string& label) const;
  bool has_entity(const std::string& label) const;
  bool has_relation(const std::string& label) const;

  std::size_t n_entity_rows() const { return entity_labels_.size(); }  // incl. DUMMY

  // all facts with this subject and relation
  const std::vector<std::uint32_t>& facts_sr(EntityId s, RelationId r) const;
  // all facts with this relation and object
  const std::vector<std::uint32_t>& facts_ro(RelationId r, EntityId o) const;
  const std::vector<std::uint32_t>& facts_of_subject(EntityId s) const;
  const std::vector<std::uint32_t>& event_fact_ids() const { return event_fact_ids_; }
  // event fact of an event entity, or nullptr
  const TemporalFact* event_fact_of(EntityId e) const;

  bool is_event_entity(EntityId e) const;

  // facts (s, r, ·) whose interval contains `year`
  std::vector<TemporalFact> facts_valid_at(EntityId s, RelationId r, int year) const;

  std::size_t duplicates_dropped() const { return duplicates_dropped_; }

 private:
  std::vector<TemporalFact> facts_;
  std::vector<std::string> entity_labels_;    // [0] = DUMMY
  std::vector<std::string> relation_labels_;  // no dummy; ids from 0
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  int y_min_ = 0, y_max_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_sr_, by_ro_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_subject_;
  std::vector<std::uint32_t> event_fact_ids_;
  std::unordered_map<std::uint32_t, std::uint32_t> event_fact_by_entity_;
  std::size_t duplicates_dropped_ = 0;

  void build_indexes();
  friend TemporalKG load_kg(const std::string&);
};

// TSV loader; columns: subject, relation, object, start_year, end_year,
// optional "E" event marker. If "<path>.vocab.json" exists it pins the
// label -> id assignment.
TemporalKG load_kg(const std::string& facts_path);

// Writes the TSV plus the vocabulary sidecar "<path>.vocab.json".
void save_kg(const TemporalKG& kg, const std::string& facts_path);

struct ToyKgParams {
  std::uint64_t seed = 7;
  std::size_t n_entities = 200;
  std::size_t n_relations = 5;
  int year_min = 1950;
  int year_max = 2020;
  std::size_t n_facts = 3000;
};

// Deterministic synthetic KG with block-community structure (keeps the
// question-entity co-mention graph partitionable for leakage-free splits).
TemporalKG generate_toy_kg(const ToyKgParams& params);

// canonical relation labels mirrored from the question templates
const std::vector<std::string>& canonical_relations();

}  // namespace tkgqa
