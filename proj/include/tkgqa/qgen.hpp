#pragma once

#include <climits>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tkgqa/tkg.hpp"

namespace tkgqa {

enum class ReasoningType : std::uint8_t {
  kSimpleTime = 0,
  kSimpleEntity = 1,
  kBeforeAfter = 2,
  kFirstLast = 3,
  kTimeJoin = 4,
};

enum class AnswerKind : std::uint8_t { kEntity = 0, kTime = 1 };

std::string reasoning_type_name(ReasoningType t);
ReasoningType reasoning_type_from_name(const std::string& s);
std::string answer_kind_name(AnswerKind k);
AnswerKind answer_kind_from_name(const std::string& s);
bool is_simple(ReasoningType t);

// Slot-bearing question template. Slots: {head} {tail} {time} {event}
// {type} {adj}. Paraphrases of one seed share seed_id, relation, answer
// kind and slot set.
struct QuestionTemplate {
  std::string seed_id;
  std::string paraphrase_id;
  std::string text;
  ReasoningType qtype = ReasoningType::kSimpleTime;
  std::string relation;  // KG relation label the answer procedure uses
  AnswerKind answer_kind = AnswerKind::kEntity;
};

// catalog of hand-written seed templates and paraphrases
const std::vector<QuestionTemplate>& builtin_templates();

// slot names present in a template text, in order of appearance
std::vector<std::string> template_slots(const std::string& text);

// throws if any template violates the slot-signature rules for its type or
// paraphrases of a seed disagree on slots/relation/kind
void validate_catalog(const std::vector<QuestionTemplate>& catalog);

inline constexpr int kUnboundYear = INT_MIN;

struct SlotBinding {
  EntityId head = kDummyEntity;   // dummy = unbound
  EntityId tail = kDummyEntity;
  EntityId event = kDummyEntity;
  int time = kUnboundYear;
  std::string type_word;  // "before" / "after"
  std::string adj_word;   // "first" / "last"
};

struct AnswerSet {
  AnswerKind kind = AnswerKind::kEntity;
  std::vector<EntityId> entities;  // sorted ascending
  std::vector<int> years;          // sorted ascending

  bool empty() const { return entities.empty() && years.empty(); }
  bool operator==(const AnswerSet&) const = default;
};

// Executes the answer procedure of the template's reasoning type over the
// KG. Throws on unbound required slots.
AnswerSet compute_answers(const QuestionTemplate& tmpl, const SlotBinding& binding,
                          const TemporalKG& kg);

struct EntityMention {
  std::string mention;
  std::size_t begin = 0, end = 0;  // [begin, end) byte offsets
  EntityId id = kDummyEntity;
  bool is_event = false;  // derived from the KG, not serialized
};

struct TimeMention {
  std::string mention;
  std::size_t begin = 0, end = 0;
  int year = 0;
};

struct QAInstance {
  std::string question;
  std::string seed_id;
  std::string paraphrase_id;
  ReasoningType qtype = ReasoningType::kSimpleTime;
  AnswerKind answer_kind = AnswerKind::kEntity;
  std::vector<EntityMention> entities;  // span order
  std::vector<TimeMention> times;
  AnswerSet answers;
  std::vector<std::string> answer_labels;  // entity answers as labels, id order
  std::string split;  // "train" / "dev" / "test" ("" before assignment)
  // train-fold-only annotations (empty/kUnboundYear when stripped)
  std::string head_label, tail_label;
  int time_annotation = kUnboundYear;
};

struct SplitSpec {
  double train = 0.70, dev = 0.15, test = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GenerationStats {
  std::size_t requested = 0;
  std::size_t generated = 0;
  std::size_t per_type[5] = {0, 0, 0, 0, 0};
  std::vector<std::string> skipped_templates;  // unsatisfiable on this KG
};

// Deterministic template-driven generation; instances carry verified
// nonempty gold answers and split labels.
std::vector<QAInstance> generate_dataset(const TemporalKG& kg,
                                         const std::vector<QuestionTemplate>& catalog,
                                         const SplitSpec& split, std::size_t target_count,
                                         GenerationStats* stats = nullptr);

// Split assignment on already-generated instances: keeps paraphrase groups
// together, keeps non-event question entities disjoint between train and
// dev+test, strips train-only annotations from dev/test. Throws when the
// entity co-mention graph cannot be split near the requested fractions.
void assign_splits(std::vector<QAInstance>& instances, const SplitSpec& split);

// (seed_id, slot binding) fingerprint; all paraphrases of one binding share it
std::string paraphrase_group_key(const QAInstance& inst);

// Matches a realized question against the template's literal segments and
// returns slot name -> surface value, or nullopt when the text does not fit.
std::optional<std::map<std::string, std::string>> match_template_slots(
    const std::string& question, const std::string& template_text);

// JSONL round trip. Answers are entity labels / integer years.
void write_dataset(const std::vector<QAInstance>& instances, const std::string& path);
std::vector<QAInstance> read_dataset(const std::string& path, const TemporalKG& kg);

// ------------------------------------------------------------- verification
struct VerifyReport {
  std::size_t n_instances = 0;
  std::size_t answer_violations = 0;
  std::size_t split_violations = 0;
  std::size_t annotation_violations = 0;
  std::vector<std::string> details;  // one line per violation

  std::size_t total() const {
    return answer_violations + split_violations + annotation_violations;
  }
  bool ok() const { return total() == 0; }
};

// Independent verifier: recomputes every answer set with a separately
// written procedure engine (flat scans, no KG indexes) and checks the split
// constraints exhaustively.
VerifyReport verify_dataset(const std::vector<QAInstance>& instances, const TemporalKG& kg,
                            const std::vector<QuestionTemplate>& catalog, int threads = 0);

}  // namespace tkgqa
