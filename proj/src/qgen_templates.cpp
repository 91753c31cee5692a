// Hand-written seed templates and paraphrases over the five canonical
// relations: five reasoning structures per relation (first/last appears
// twice, once per answer kind), thirty seeds total.

#include "tkgqa/qgen.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace tkgqa {

namespace {

struct Seed {
  const char* id;
  ReasoningType qtype;
  const char* relation;
  AnswerKind kind;
  std::vector<const char*> paraphrases;
};

const std::vector<Seed>& seeds() {
  static const std::vector<Seed> s = {
      // ------------------------------------------------------- simple time
      {"mst.simple_time", ReasoningType::kSimpleTime, "member of sports team",
       AnswerKind::kTime,
       {"when did {head} play in {tail}",
        "when was {head} playing in {tail}",
        "which years did {head} play in {tail}"}},
      {"pos.simple_time", ReasoningType::kSimpleTime, "position held", AnswerKind::kTime,
       {"when did {head} hold the position of {tail}",
        "when was {head} the {tail}",
        "during which years did {head} hold the position of {tail}"}},
      {"awd.simple_time", ReasoningType::kSimpleTime, "award received", AnswerKind::kTime,
       {"when did {head} receive the {tail}",
        "in which year did {head} win the {tail}",
        "when was {head} awarded the {tail}"}},
      {"spo.simple_time", ReasoningType::kSimpleTime, "spouse", AnswerKind::kTime,
       {"when was {head} married to {tail}",
        "which years were {head} and {tail} married",
        "when did {head} have {tail} as their spouse"}},
      {"emp.simple_time", ReasoningType::kSimpleTime, "employer", AnswerKind::kTime,
       {"when did {head} work for {tail}",
        "when was {head} employed at {tail}",
        "which years did {head} work at {tail}"}},

      // ----------------------------------------------------- simple entity
      {"mst.simple_entity", ReasoningType::kSimpleEntity, "member of sports team",
       AnswerKind::kEntity,
       {"which team did {head} play for in {time}",
        "which team was {head} a member of in {time}",
        "what team did {head} belong to in {time}"}},
      {"pos.simple_entity", ReasoningType::kSimpleEntity, "position held", AnswerKind::kEntity,
       {"what position did {head} hold in {time}",
        "which position was held by {head} in {time}",
        "what was the position of {head} in {time}"}},
      {"awd.simple_entity", ReasoningType::kSimpleEntity, "award received", AnswerKind::kEntity,
       {"which award did {head} receive in {time}",
        "what award did {head} win in {time}",
        "which prize was given to {head} in {time}"}},
      {"spo.simple_entity", ReasoningType::kSimpleEntity, "spouse", AnswerKind::kEntity,
       {"who was {head} married to in {time}",
        "who was the spouse of {head} in {time}",
        "who did {head} have as their spouse in {time}"}},
      {"emp.simple_entity", ReasoningType::kSimpleEntity, "employer", AnswerKind::kEntity,
       {"who did {head} work for in {time}",
        "who was the employer of {head} in {time}",
        "where did {head} work in {time}"}},

      // ------------------------------------------------------ before/after
      {"mst.before_after", ReasoningType::kBeforeAfter, "member of sports team",
       AnswerKind::kEntity,
       {"who played for {tail} {type} {head}",
        "who was in {tail} {type} {head}",
        "which player joined {tail} right {type} {head}"}},
      {"pos.before_after", ReasoningType::kBeforeAfter, "position held", AnswerKind::kEntity,
       {"who was the {tail} {type} {head}",
        "who held the position of {tail} {type} {head}",
        "who served as {tail} {type} {head}"}},
      {"awd.before_after", ReasoningType::kBeforeAfter, "award received", AnswerKind::kEntity,
       {"who received the {tail} {type} {head}",
        "who won the {tail} {type} {head}",
        "who was given the {tail} {type} {head}"}},
      {"spo.before_after", ReasoningType::kBeforeAfter, "spouse", AnswerKind::kEntity,
       {"who was married to {tail} {type} {head}",
        "who was the spouse of {tail} {type} {head}",
        "who had {tail} as their spouse {type} {head}"}},
      {"emp.before_after", ReasoningType::kBeforeAfter, "employer", AnswerKind::kEntity,
       {"who worked for {tail} {type} {head}",
        "who was employed by {tail} {type} {head}",
        "who had a job at {tail} {type} {head}"}},

      // ------------------------------------------------- first/last (time)
      {"mst.first_last_time", ReasoningType::kFirstLast, "member of sports team",
       AnswerKind::kTime,
       {"when did {head} play their {adj} game",
        "when was the {adj} time {head} played in a team"}},
      {"pos.first_last_time", ReasoningType::kFirstLast, "position held", AnswerKind::kTime,
       {"when did {head} hold their {adj} position",
        "when was {head} {adj} in office"}},
      {"awd.first_last_time", ReasoningType::kFirstLast, "award received", AnswerKind::kTime,
       {"when did {head} win their {adj} award",
        "when was {head} {adj} given an award"}},
      {"spo.first_last_time", ReasoningType::kFirstLast, "spouse", AnswerKind::kTime,
       {"when did {head} get married for the {adj} time",
        "when was the {adj} marriage of {head}"}},
      {"emp.first_last_time", ReasoningType::kFirstLast, "employer", AnswerKind::kTime,
       {"when did {head} work at their {adj} job",
        "when was the {adj} time {head} was employed"}},

      // ----------------------------------------------- first/last (entity)
      {"mst.first_last_entity", ReasoningType::kFirstLast, "member of sports team",
       AnswerKind::kEntity,
       {"what was the {adj} team of {head}",
        "which team did {head} play for the {adj} time"}},
      {"pos.first_last_entity", ReasoningType::kFirstLast, "position held",
       AnswerKind::kEntity,
       {"what was the {adj} position of {head}",
        "which position did {head} hold the {adj} time"}},
      {"awd.first_last_entity", ReasoningType::kFirstLast, "award received",
       AnswerKind::kEntity,
       {"what was the {adj} award of {head}",
        "which award did {head} win the {adj} time"}},
      {"spo.first_last_entity", ReasoningType::kFirstLast, "spouse", AnswerKind::kEntity,
       {"who was the {adj} spouse of {head}",
        "who was the {adj} person {head} was married to"}},
      {"emp.first_last_entity", ReasoningType::kFirstLast, "employer", AnswerKind::kEntity,
       {"who was the {adj} employer of {head}",
        "where did {head} work the {adj} time"}},

      // --------------------------------------------------------- time join
      {"mst.time_join", ReasoningType::kTimeJoin, "member of sports team",
       AnswerKind::kEntity,
       {"who played with {head} in {tail}",
        "who was in {tail} together with {head}",
        "who was the teammate of {head} in {tail}"}},
      {"pos.time_join", ReasoningType::kTimeJoin, "position held", AnswerKind::kEntity,
       {"who held the position of {tail} during {event}",
        "who was the {tail} during {event}",
        "who was the {tail} when {event} happened"}},
      {"awd.time_join", ReasoningType::kTimeJoin, "award received", AnswerKind::kEntity,
       {"who received the {tail} during {event}",
        "who won the {tail} during {event}",
        "who was given the {tail} while {event} was happening"}},
      {"spo.time_join", ReasoningType::kTimeJoin, "spouse", AnswerKind::kEntity,
       {"who was married to {tail} during {event}",
        "who was the spouse of {tail} during {event}",
        "who had {tail} as their spouse during {event}"}},
      {"emp.time_join", ReasoningType::kTimeJoin, "employer", AnswerKind::kEntity,
       {"who worked with {head} at {tail}",
        "who was employed at {tail} while {head} worked there",
        "who did {head} work with at {tail}"}},
  };
  return s;
}

}  // namespace

const std::vector<QuestionTemplate>& builtin_templates() {
  static const std::vector<QuestionTemplate> catalog = [] {
    std::vector<QuestionTemplate> out;
    for (const auto& seed : seeds()) {
      int p = 0;
      for (const char* text : seed.paraphrases) {
        QuestionTemplate t;
        t.seed_id = seed.id;
        t.paraphrase_id = std::string(seed.id) + "#p" + std::to_string(p++);
        t.text = text;
        t.qtype = seed.qtype;
        t.relation = seed.relation;
        t.answer_kind = seed.kind;
        out.push_back(std::move(t));
      }
    }
    validate_catalog(out);
    return out;
  }();
  return catalog;
}

std::vector<std::string> template_slots(const std::string& text) {
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find('{', pos);
    if (open == std::string::npos) break;
    std::size_t close = text.find('}', open);
    if (close == std::string::npos)
      throw std::invalid_argument("unterminated slot in template: " + text);
    slots.push_back(text.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return slots;
}

void validate_catalog(const std::vector<QuestionTemplate>& catalog) {
  static const std::set<std::string> known = {"head", "tail", "time", "event", "type", "adj"};
  // allowed slot signatures per reasoning type
  auto allowed = [](ReasoningType t) -> std::vector<std::set<std::string>> {
    switch (t) {
      case ReasoningType::kSimpleTime: return {{"head", "tail"}};
      case ReasoningType::kSimpleEntity: return {{"head", "time"}};
      case ReasoningType::kBeforeAfter: return {{"head", "tail", "type"}};
      case ReasoningType::kFirstLast: return {{"head", "adj"}};
      case ReasoningType::kTimeJoin: return {{"tail", "event"}, {"head", "tail"}};
    }
    return {};
  };

  std::map<std::string, std::set<std::string>> seed_slots;
  std::map<std::string, std::pair<std::string, AnswerKind>> seed_sig;
  std::set<std::string> paraphrase_ids;
  for (const auto& t : catalog) {
    if (!paraphrase_ids.insert(t.paraphrase_id).second)
      throw std::invalid_argument("duplicate paraphrase_id: " + t.paraphrase_id);
    std::set<std::string> slots;
    for (const auto& s : template_slots(t.text)) {
      if (!known.count(s))
        throw std::invalid_argument("unknown slot {" + s + "} in " + t.paraphrase_id);
      if (!slots.insert(s).second)
        throw std::invalid_argument("repeated slot {" + s + "} in " + t.paraphrase_id);
    }
    bool ok = false;
    for (const auto& sig : allowed(t.qtype)) ok = ok || sig == slots;
    if (!ok)
      throw std::invalid_argument("slot set does not match reasoning type in " +
                                  t.paraphrase_id);
    auto [it, fresh] = seed_slots.emplace(t.seed_id, slots);
    if (!fresh && it->second != slots)
      throw std::invalid_argument("paraphrases of seed " + t.seed_id +
                                  " disagree on slots");
    auto [it2, fresh2] = seed_sig.emplace(t.seed_id, std::make_pair(t.relation, t.answer_kind));
    if (!fresh2 && (it2->second.first != t.relation || it2->second.second != t.answer_kind))
      throw std::invalid_argument("paraphrases of seed " + t.seed_id +
                                  " disagree on relation or answer kind");
  }
  // every seed needs at least two paraphrases
  std::map<std::string, int> counts;
  for (const auto& t : catalog) counts[t.seed_id]++;
  for (const auto& [id, n] : counts)
    if (n < 2) throw std::invalid_argument("seed " + id + " has fewer than 2 paraphrases");
}

std::string reasoning_type_name(ReasoningType t) {
  switch (t) {
    case ReasoningType::kSimpleTime: return "simple_time";
    case ReasoningType::kSimpleEntity: return "simple_entity";
    case ReasoningType::kBeforeAfter: return "before_after";
    case ReasoningType::kFirstLast: return "first_last";
    case ReasoningType::kTimeJoin: return "time_join";
  }
  throw std::invalid_argument("bad reasoning type");
}

ReasoningType reasoning_type_from_name(const std::string& s) {
  if (s == "simple_time") return ReasoningType::kSimpleTime;
  if (s == "simple_entity") return ReasoningType::kSimpleEntity;
  if (s == "before_after") return ReasoningType::kBeforeAfter;
  if (s == "first_last") return ReasoningType::kFirstLast;
  if (s == "time_join") return ReasoningType::kTimeJoin;
  throw std::invalid_argument("unknown reasoning type: " + s);
}

std::string answer_kind_name(AnswerKind k) {
  return k == AnswerKind::kEntity ? "entity" : "time";
}

AnswerKind answer_kind_from_name(const std::string& s) {
  if (s == "entity") return AnswerKind::kEntity;
  if (s == "time") return AnswerKind::kTime;
  throw std::invalid_argument("unknown answer kind: " + s);
}

bool is_simple(ReasoningType t) {
  return t == ReasoningType::kSimpleTime || t == ReasoningType::kSimpleEntity;
}

}  // namespace tkgqa
