// Independent dataset verifier. The answer procedures here are a second
// implementation written as flat scans over the fact list, no KG indexes;
// agreement with the generator is only meaningful because the code paths
// differ.

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tkgqa/parallel.hpp"
#include "tkgqa/qgen.hpp"

namespace tkgqa {

namespace {

bool overlap(int a1, int b1, int a2, int b2) { return a1 <= b2 && a2 <= b1; }

std::vector<int> scan_simple_time(const TemporalKG& kg, RelationId rel, EntityId head,
                                  EntityId tail) {
  std::set<int> ys;
  for (const auto& f : kg.facts())
    if (f.subject == head && f.relation == rel && f.object == tail)
      for (int y = f.start; y <= f.end; ++y) ys.insert(y);
  return {ys.begin(), ys.end()};
}

std::vector<EntityId> scan_simple_entity(const TemporalKG& kg, RelationId rel, EntityId head,
                                         int year) {
  std::set<EntityId> es;
  for (const auto& f : kg.facts())
    if (f.subject == head && f.relation == rel && f.start <= year && year <= f.end)
      es.insert(f.object);
  return {es.begin(), es.end()};
}

std::vector<EntityId> scan_before_after(const TemporalKG& kg, RelationId rel, EntityId head,
                                        EntityId tail, bool before) {
  int anchor_start = INT_MAX, anchor_end = INT_MIN;
  bool found = false;
  for (const auto& f : kg.facts())
    if (f.subject == head && f.relation == rel && f.object == tail) {
      anchor_start = std::min(anchor_start, f.start);
      anchor_end = std::max(anchor_end, f.end);
      found = true;
    }
  if (!found) return {};
  std::set<EntityId> es;
  if (before) {
    int best = INT_MIN;
    for (const auto& f : kg.facts())
      if (f.subject != head && f.relation == rel && f.object == tail && f.end <= anchor_start)
        best = std::max(best, f.end);
    if (best == INT_MIN) return {};
    for (const auto& f : kg.facts())
      if (f.subject != head && f.relation == rel && f.object == tail && f.end == best)
        es.insert(f.subject);
  } else {
    int best = INT_MAX;
    for (const auto& f : kg.facts())
      if (f.subject != head && f.relation == rel && f.object == tail && f.start >= anchor_end)
        best = std::min(best, f.start);
    if (best == INT_MAX) return {};
    for (const auto& f : kg.facts())
      if (f.subject != head && f.relation == rel && f.object == tail && f.start == best)
        es.insert(f.subject);
  }
  return {es.begin(), es.end()};
}

void scan_first_last(const TemporalKG& kg, RelationId rel, EntityId head, bool first,
                     AnswerKind kind, std::vector<EntityId>* ents, std::vector<int>* years) {
  int m = first ? INT_MAX : INT_MIN;
  bool found = false;
  for (const auto& f : kg.facts())
    if (f.subject == head && f.relation == rel) {
      m = first ? std::min(m, f.start) : std::max(m, f.end);
      found = true;
    }
  if (!found) return;
  if (kind == AnswerKind::kTime) {
    years->push_back(m);
    return;
  }
  std::set<EntityId> es;
  for (const auto& f : kg.facts())
    if (f.subject == head && f.relation == rel && (first ? f.start : f.end) == m)
      es.insert(f.object);
  ents->assign(es.begin(), es.end());
}

std::vector<EntityId> scan_time_join(const TemporalKG& kg, RelationId rel, EntityId tail,
                                     EntityId head_or_dummy, EntityId event_or_dummy) {
  std::vector<std::pair<int, int>> refs;
  if (event_or_dummy != kDummyEntity) {
    for (const auto& f : kg.facts())
      if (f.is_event && f.subject == event_or_dummy) refs.emplace_back(f.start, f.end);
  } else {
    for (const auto& f : kg.facts())
      if (f.subject == head_or_dummy && f.relation == rel && f.object == tail)
        refs.emplace_back(f.start, f.end);
  }
  if (refs.empty()) return {};
  std::set<EntityId> es;
  for (const auto& f : kg.facts()) {
    if (f.relation != rel || f.object != tail) continue;
    if (head_or_dummy != kDummyEntity && f.subject == head_or_dummy) continue;
    for (const auto& [a, z] : refs)
      if (overlap(f.start, f.end, a, z)) {
        es.insert(f.subject);
        break;
      }
  }
  return {es.begin(), es.end()};
}

struct InstanceCheck {
  std::vector<std::string> problems;   // answer/annotation problems, one entry each
  bool answer_bad = false;
  bool annotation_bad = false;
  std::string group_key;               // for the fold-integrity check
  std::vector<EntityId> nonevent_mentions;
};

InstanceCheck check_instance(const QAInstance& inst, const TemporalKG& kg,
                             const std::map<std::string, const QuestionTemplate*>& by_pid,
                             std::size_t index) {
  InstanceCheck out;
  auto fail = [&](bool& flag, const std::string& what) {
    flag = true;
    std::ostringstream os;
    os << "instance " << index << " [" << inst.question << "]: " << what;
    out.problems.push_back(os.str());
  };

  auto it = by_pid.find(inst.paraphrase_id);
  if (it == by_pid.end()) {
    fail(out.answer_bad, "unknown paraphrase_id " + inst.paraphrase_id);
    return out;
  }
  const QuestionTemplate& tmpl = *it->second;

  // annotation integrity: spans ordered, disjoint, inside the text, and
  // matching the claimed mention strings
  std::size_t prev_end = 0;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& e : inst.entities) spans.emplace_back(e.begin, e.end);
  for (const auto& t : inst.times) spans.emplace_back(t.begin, t.end);
  std::sort(spans.begin(), spans.end());
  for (const auto& [a, b] : spans) {
    if (a < prev_end || b > inst.question.size() || a >= b) {
      fail(out.annotation_bad, "mention spans overlap or leave the text");
      return out;
    }
    prev_end = b;
  }
  for (const auto& e : inst.entities)
    if (inst.question.substr(e.begin, e.end - e.begin) != e.mention ||
        kg.entity_label(e.id) != e.mention) {
      fail(out.annotation_bad, "entity mention does not match span or id");
      return out;
    }
  for (const auto& t : inst.times)
    if (inst.question.substr(t.begin, t.end - t.begin) != t.mention ||
        std::to_string(t.year) != t.mention) {
      fail(out.annotation_bad, "time mention does not match span or year");
      return out;
    }

  // recover the binding from the template shape + annotations
  auto slots_opt = match_template_slots(inst.question, tmpl.text);
  if (!slots_opt) {
    fail(out.answer_bad, "question text does not fit template " + tmpl.paraphrase_id);
    return out;
  }
  const auto& slot_values = *slots_opt;
  const std::vector<std::string> slot_order = template_slots(tmpl.text);

  SlotBinding b;
  std::size_t ent_i = 0, time_i = 0;
  for (const auto& slot : slot_order) {
    if (slot == "head" || slot == "tail" || slot == "event") {
      if (ent_i >= inst.entities.size()) {
        fail(out.annotation_bad, "fewer entity mentions than entity slots");
        return out;
      }
      const EntityMention& m = inst.entities[ent_i++];
      if (m.mention != slot_values.at(slot)) {
        fail(out.annotation_bad, "entity mention order disagrees with template slots");
        return out;
      }
      if (slot == "head") b.head = m.id;
      if (slot == "tail") b.tail = m.id;
      if (slot == "event") b.event = m.id;
    } else if (slot == "time") {
      if (time_i >= inst.times.size()) {
        fail(out.annotation_bad, "missing time mention");
        return out;
      }
      b.time = inst.times[time_i++].year;
    } else if (slot == "type") {
      b.type_word = slot_values.at(slot);
    } else if (slot == "adj") {
      b.adj_word = slot_values.at(slot);
    }
  }
  if (ent_i != inst.entities.size() || time_i != inst.times.size()) {
    fail(out.annotation_bad, "extra mentions beyond template slots");
    return out;
  }

  // group key mirrors (seed, binding)
  {
    std::ostringstream os;
    os << inst.seed_id << "|h" << b.head << "|t" << b.tail << "|e" << b.event << "|y" << b.time
       << "|" << b.type_word << "|" << b.adj_word;
    out.group_key = os.str();
  }
  for (const auto& e : inst.entities)
    if (!kg.is_event_entity(e.id)) out.nonevent_mentions.push_back(e.id);

  // recompute the gold answers with the flat-scan engine
  const RelationId rel = kg.relation_id(tmpl.relation);
  std::vector<EntityId> want_e;
  std::vector<int> want_y;
  switch (tmpl.qtype) {
    case ReasoningType::kSimpleTime:
      want_y = scan_simple_time(kg, rel, b.head, b.tail);
      break;
    case ReasoningType::kSimpleEntity:
      want_e = scan_simple_entity(kg, rel, b.head, b.time);
      break;
    case ReasoningType::kBeforeAfter:
      if (b.type_word != "before" && b.type_word != "after") {
        fail(out.answer_bad, "bad {type} word '" + b.type_word + "'");
        return out;
      }
      want_e = scan_before_after(kg, rel, b.head, b.tail, b.type_word == "before");
      break;
    case ReasoningType::kFirstLast:
      if (b.adj_word != "first" && b.adj_word != "last") {
        fail(out.answer_bad, "bad {adj} word '" + b.adj_word + "'");
        return out;
      }
      scan_first_last(kg, rel, b.head, b.adj_word == "first", tmpl.answer_kind, &want_e,
                      &want_y);
      break;
    case ReasoningType::kTimeJoin:
      want_e = scan_time_join(kg, rel, b.tail, b.head, b.event);
      break;
  }

  if (want_e.empty() && want_y.empty()) {
    fail(out.answer_bad, "gold answers should be empty (procedure finds none)");
    return out;
  }
  if (inst.answers.empty()) {
    fail(out.answer_bad, "gold answer set is empty");
    return out;
  }
  for (int y : inst.answers.years)
    if (y < kg.y_min() || y > kg.y_max()) {
      fail(out.answer_bad, "gold year outside KG range");
      return out;
    }
  if (inst.answers.entities != want_e || inst.answers.years != want_y) {
    fail(out.answer_bad, "gold answers disagree with recomputed answers");
    return out;
  }

  // fold-local annotation rules
  if (inst.split == "train") {
    const bool head_ok = (b.head == kDummyEntity)
                             ? inst.head_label.empty()
                             : inst.head_label == kg.entity_label(b.head);
    const bool tail_ok = (b.tail == kDummyEntity)
                             ? inst.tail_label.empty()
                             : inst.tail_label == kg.entity_label(b.tail);
    const bool time_ok = (b.time == kUnboundYear) ? inst.time_annotation == kUnboundYear
                                                  : inst.time_annotation == b.time;
    if (!head_ok || !tail_ok || !time_ok)
      fail(out.annotation_bad, "train-fold head/tail/time annotation mismatch");
  } else if (inst.split == "dev" || inst.split == "test") {
    if (!inst.head_label.empty() || !inst.tail_label.empty() ||
        inst.time_annotation != kUnboundYear)
      fail(out.annotation_bad, "dev/test instance carries train-only annotations");
  } else {
    fail(out.annotation_bad, "missing split label");
  }
  return out;
}

}  // namespace

VerifyReport verify_dataset(const std::vector<QAInstance>& instances, const TemporalKG& kg,
                            const std::vector<QuestionTemplate>& catalog, int threads) {
  VerifyReport rep;
  rep.n_instances = instances.size();

  std::map<std::string, const QuestionTemplate*> by_pid;
  for (const auto& t : catalog) by_pid[t.paraphrase_id] = &t;

  const std::size_t chunk = 256;
  const std::size_t n_chunks = num_chunks(instances.size(), chunk);
  std::vector<std::vector<InstanceCheck>> results(n_chunks);
  parallel_chunks(instances.size(), chunk, resolve_threads(threads),
                  [&](std::size_t c, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      results[c].push_back(check_instance(instances[i], kg, by_pid, i));
  });

  std::map<std::string, std::set<std::string>> group_folds;
  std::map<std::string, std::size_t> group_first;
  std::set<EntityId> train_entities, eval_entities;
  std::size_t idx = 0;
  for (const auto& chunk_res : results) {
    for (const auto& r : chunk_res) {
      const QAInstance& inst = instances[idx];
      if (r.answer_bad) ++rep.answer_violations;
      if (r.annotation_bad) ++rep.annotation_violations;
      for (const auto& p : r.problems) rep.details.push_back(p);
      if (!r.group_key.empty()) {
        group_folds[r.group_key].insert(inst.split);
        group_first.emplace(r.group_key, idx);
      }
      for (EntityId e : r.nonevent_mentions)
        (inst.split == "train" ? train_entities : eval_entities).insert(e);
      ++idx;
    }
  }

  for (const auto& [key, folds] : group_folds) {
    if (folds.size() > 1) {
      ++rep.split_violations;
      rep.details.push_back("paraphrase group " + key + " spans " +
                            std::to_string(folds.size()) + " folds (first instance " +
                            std::to_string(group_first[key]) + ")");
    }
  }
  for (EntityId e : train_entities) {
    if (eval_entities.count(e)) {
      ++rep.split_violations;
      rep.details.push_back("non-event entity '" + kg.entity_label(e) +
                            "' appears in train and in dev/test questions");
    }
  }
  return rep;
}

}  // namespace tkgqa
