#include "tkgqa/qgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tkgqa/rng.hpp"

namespace tkgqa {

namespace {

bool intervals_intersect(int a1, int b1, int a2, int b2) { return a1 <= b2 && a2 <= b1; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void sort_unique(std::vector<EntityId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

void SplitSpec::validate() const {
  if (train <= 0 || dev <= 0 || test <= 0 || std::abs(train + dev + test - 1.0) > 1e-9)
    throw std::invalid_argument("SplitSpec fractions must be positive and sum to 1");
}

AnswerSet compute_answers(const QuestionTemplate& tmpl, const SlotBinding& b,
                          const TemporalKG& kg) {
  AnswerSet out;
  out.kind = tmpl.answer_kind;
  const RelationId rel = kg.relation_id(tmpl.relation);

  auto require = [&](bool bound, const char* slot) {
    if (!bound)
      throw std::invalid_argument("compute_answers: unbound slot {" + std::string(slot) +
                                  "} for " + tmpl.paraphrase_id);
  };

  switch (tmpl.qtype) {
    case ReasoningType::kSimpleTime: {
      require(b.head != kDummyEntity, "head");
      require(b.tail != kDummyEntity, "tail");
      for (auto fi : kg.facts_sr(b.head, rel)) {
        const auto& f = kg.facts()[fi];
        if (f.object != b.tail) continue;
        for (int y = f.start; y <= f.end; ++y) out.years.push_back(y);
      }
      sort_unique(out.years);
      break;
    }
    case ReasoningType::kSimpleEntity: {
      require(b.head != kDummyEntity, "head");
      require(b.time != kUnboundYear, "time");
      for (const auto& f : kg.facts_valid_at(b.head, rel, b.time))
        out.entities.push_back(f.object);
      sort_unique(out.entities);
      break;
    }
    case ReasoningType::kBeforeAfter: {
      require(b.head != kDummyEntity, "head");
      require(b.tail != kDummyEntity, "tail");
      require(!b.type_word.empty(), "type");
      const bool before = b.type_word == "before";
      if (!before && b.type_word != "after")
        throw std::invalid_argument("compute_answers: {type} must be before/after");
      // anchor: earliest interval for "before", latest for "after"
      bool have_anchor = false;
      int anchor_start = 0, anchor_end = 0;
      for (auto fi : kg.facts_sr(b.head, rel)) {
        const auto& f = kg.facts()[fi];
        if (f.object != b.tail) continue;
        if (!have_anchor) {
          anchor_start = f.start;
          anchor_end = f.end;
          have_anchor = true;
        } else {
          anchor_start = std::min(anchor_start, f.start);
          anchor_end = std::max(anchor_end, f.end);
        }
      }
      if (!have_anchor) break;
      if (before) {
        int best_end = kUnboundYear;
        for (auto fi : kg.facts_ro(rel, b.tail)) {
          const auto& f = kg.facts()[fi];
          if (f.subject == b.head || f.end > anchor_start) continue;
          best_end = std::max(best_end, f.end);
        }
        if (best_end != kUnboundYear)
          for (auto fi : kg.facts_ro(rel, b.tail)) {
            const auto& f = kg.facts()[fi];
            if (f.subject != b.head && f.end == best_end) out.entities.push_back(f.subject);
          }
      } else {
        int best_start = INT_MAX;
        for (auto fi : kg.facts_ro(rel, b.tail)) {
          const auto& f = kg.facts()[fi];
          if (f.subject == b.head || f.start < anchor_end) continue;
          best_start = std::min(best_start, f.start);
        }
        if (best_start != INT_MAX)
          for (auto fi : kg.facts_ro(rel, b.tail)) {
            const auto& f = kg.facts()[fi];
            if (f.subject != b.head && f.start == best_start) out.entities.push_back(f.subject);
          }
      }
      sort_unique(out.entities);
      break;
    }
    case ReasoningType::kFirstLast: {
      require(b.head != kDummyEntity, "head");
      require(!b.adj_word.empty(), "adj");
      const bool first = b.adj_word == "first";
      if (!first && b.adj_word != "last")
        throw std::invalid_argument("compute_answers: {adj} must be first/last");
      const auto& fis = kg.facts_sr(b.head, rel);
      if (fis.empty()) break;
      if (first) {
        int m = INT_MAX;
        for (auto fi : fis) m = std::min(m, kg.facts()[fi].start);
        if (tmpl.answer_kind == AnswerKind::kTime) {
          out.years.push_back(m);
        } else {
          for (auto fi : fis)
            if (kg.facts()[fi].start == m) out.entities.push_back(kg.facts()[fi].object);
        }
      } else {
        int m = kUnboundYear;
        for (auto fi : fis) m = std::max(m, kg.facts()[fi].end);
        if (tmpl.answer_kind == AnswerKind::kTime) {
          out.years.push_back(m);
        } else {
          for (auto fi : fis)
            if (kg.facts()[fi].end == m) out.entities.push_back(kg.facts()[fi].object);
        }
      }
      sort_unique(out.entities);
      sort_unique(out.years);
      break;
    }
    case ReasoningType::kTimeJoin: {
      require(b.tail != kDummyEntity, "tail");
      std::vector<std::pair<int, int>> refs;
      EntityId excluded = kDummyEntity;
      if (b.event != kDummyEntity) {
        const TemporalFact* ef = kg.event_fact_of(b.event);
        if (ef == nullptr)
          throw std::invalid_argument("compute_answers: {event} is not an event entity");
        refs.emplace_back(ef->start, ef->end);
      } else {
        require(b.head != kDummyEntity, "head or event");
        excluded = b.head;
        for (auto fi : kg.facts_sr(b.head, rel)) {
          const auto& f = kg.facts()[fi];
          if (f.object == b.tail) refs.emplace_back(f.start, f.end);
        }
        if (refs.empty()) break;
      }
      for (auto fi : kg.facts_ro(rel, b.tail)) {
        const auto& f = kg.facts()[fi];
        if (f.subject == excluded) continue;
        for (const auto& [a, z] : refs)
          if (intervals_intersect(f.start, f.end, a, z)) {
            out.entities.push_back(f.subject);
            break;
          }
      }
      sort_unique(out.entities);
      break;
    }
  }
  return out;
}

// --------------------------------------------------------------- realization

namespace {

std::string binding_fingerprint(const std::string& seed_id, const SlotBinding& b) {
  std::ostringstream os;
  os << seed_id << "|h" << b.head << "|t" << b.tail << "|e" << b.event << "|y" << b.time << "|"
     << b.type_word << "|" << b.adj_word;
  return os.str();
}

QAInstance realize(const QuestionTemplate& tmpl, const SlotBinding& b, const AnswerSet& answers,
                   const TemporalKG& kg) {
  QAInstance inst;
  inst.seed_id = tmpl.seed_id;
  inst.paraphrase_id = tmpl.paraphrase_id;
  inst.qtype = tmpl.qtype;
  inst.answer_kind = tmpl.answer_kind;
  inst.answers = answers;

  std::string q;
  const std::string& text = tmpl.text;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      q += text.substr(pos);
      break;
    }
    q += text.substr(pos, open - pos);
    std::size_t close = text.find('}', open);
    const std::string slot = text.substr(open + 1, close - open - 1);
    std::string value;
    if (slot == "head") {
      value = kg.entity_label(b.head);
      inst.entities.push_back({value, q.size(), q.size() + value.size(), b.head});
    } else if (slot == "tail") {
      value = kg.entity_label(b.tail);
      inst.entities.push_back({value, q.size(), q.size() + value.size(), b.tail});
    } else if (slot == "event") {
      value = kg.entity_label(b.event);
      inst.entities.push_back({value, q.size(), q.size() + value.size(), b.event});
    } else if (slot == "time") {
      value = std::to_string(b.time);
      inst.times.push_back({value, q.size(), q.size() + value.size(), b.time});
    } else if (slot == "type") {
      value = b.type_word;
    } else if (slot == "adj") {
      value = b.adj_word;
    }
    q += value;
    pos = close + 1;
  }
  inst.question = std::move(q);

  // mention arrays in span order
  std::sort(inst.entities.begin(), inst.entities.end(),
            [](const EntityMention& a, const EntityMention& x) { return a.begin < x.begin; });
  std::sort(inst.times.begin(), inst.times.end(),
            [](const TimeMention& a, const TimeMention& x) { return a.begin < x.begin; });

  for (auto& em : inst.entities) em.is_event = kg.is_event_entity(em.id);
  if (inst.answer_kind == AnswerKind::kEntity)
    for (EntityId e : inst.answers.entities) inst.answer_labels.push_back(kg.entity_label(e));

  if (b.head != kDummyEntity) inst.head_label = kg.entity_label(b.head);
  if (b.tail != kDummyEntity) inst.tail_label = kg.entity_label(b.tail);
  inst.time_annotation = b.time;
  return inst;
}

struct BindingPool {
  // candidate bindings with precomputed answers for one seed
  std::vector<SlotBinding> bindings;
  std::vector<AnswerSet> answers;
};

BindingPool enumerate_bindings(const TemporalKG& kg, const QuestionTemplate& seed_tmpl) {
  BindingPool pool;
  const RelationId rel = kg.relation_id(seed_tmpl.relation);
  const auto slots = [&] {
    std::set<std::string> s;
    for (const auto& x : template_slots(seed_tmpl.text)) s.insert(x);
    return s;
  }();

  auto push_if_answerable = [&](const SlotBinding& b) {
    AnswerSet a = compute_answers(seed_tmpl, b, kg);
    if (a.empty()) return;
    pool.bindings.push_back(b);
    pool.answers.push_back(std::move(a));
  };

  switch (seed_tmpl.qtype) {
    case ReasoningType::kSimpleTime: {
      std::set<std::pair<EntityId, EntityId>> pairs;
      for (const auto& f : kg.facts())
        if (f.relation == rel) pairs.insert({f.subject, f.object});
      for (const auto& [s, o] : pairs) {
        SlotBinding b;
        b.head = s;
        b.tail = o;
        push_if_answerable(b);
      }
      break;
    }
    case ReasoningType::kSimpleEntity: {
      std::set<std::pair<EntityId, int>> keys;
      for (const auto& f : kg.facts())
        if (f.relation == rel)
          for (int y = f.start; y <= f.end; ++y) keys.insert({f.subject, y});
      for (const auto& [s, y] : keys) {
        SlotBinding b;
        b.head = s;
        b.time = y;
        push_if_answerable(b);
      }
      break;
    }
    case ReasoningType::kBeforeAfter: {
      std::set<std::pair<EntityId, EntityId>> pairs;
      for (const auto& f : kg.facts())
        if (f.relation == rel) pairs.insert({f.subject, f.object});
      for (const auto& [s, o] : pairs)
        for (const char* w : {"before", "after"}) {
          SlotBinding b;
          b.head = s;
          b.tail = o;
          b.type_word = w;
          push_if_answerable(b);
        }
      break;
    }
    case ReasoningType::kFirstLast: {
      std::set<EntityId> subjects;
      for (const auto& f : kg.facts())
        if (f.relation == rel) subjects.insert(f.subject);
      for (EntityId s : subjects)
        for (const char* w : {"first", "last"}) {
          SlotBinding b;
          b.head = s;
          b.adj_word = w;
          push_if_answerable(b);
        }
      break;
    }
    case ReasoningType::kTimeJoin: {
      if (slots.count("event")) {
        std::set<EntityId> tails;
        for (const auto& f : kg.facts())
          if (f.relation == rel) tails.insert(f.object);
        std::vector<EntityId> events;
        for (auto fi : kg.event_fact_ids()) events.push_back(kg.facts()[fi].subject);
        sort_unique(events);
        for (EntityId o : tails)
          for (EntityId ev : events) {
            SlotBinding b;
            b.tail = o;
            b.event = ev;
            push_if_answerable(b);
          }
      } else {
        std::set<std::pair<EntityId, EntityId>> pairs;
        for (const auto& f : kg.facts())
          if (f.relation == rel) pairs.insert({f.subject, f.object});
        for (const auto& [s, o] : pairs) {
          SlotBinding b;
          b.head = s;
          b.tail = o;
          push_if_answerable(b);
        }
      }
      break;
    }
  }
  return pool;
}

}  // namespace

std::vector<QAInstance> generate_dataset(const TemporalKG& kg,
                                         const std::vector<QuestionTemplate>& catalog,
                                         const SplitSpec& split, std::size_t target_count,
                                         GenerationStats* stats) {
  split.validate();
  validate_catalog(catalog);
  GenerationStats local;
  GenerationStats& st = stats ? *stats : local;
  st.requested = target_count;

  // group catalog by seed, preserving catalog order
  std::vector<std::string> seed_order;
  std::map<std::string, std::vector<const QuestionTemplate*>> by_seed;
  for (const auto& t : catalog) {
    if (!by_seed.count(t.seed_id)) seed_order.push_back(t.seed_id);
    by_seed[t.seed_id].push_back(&t);
  }

  struct SeedPool {
    const std::vector<const QuestionTemplate*>* paraphrases = nullptr;
    BindingPool pool;
    std::vector<std::size_t> order;  // shuffled index into pool
    std::size_t next = 0;
    ReasoningType qtype = ReasoningType::kSimpleTime;
  };

  Rng rng(split.seed ^ 0x7167656eULL);
  std::vector<SeedPool> pools;
  for (const auto& sid : seed_order) {
    const auto& paras = by_seed[sid];
    const QuestionTemplate* anchor = paras.front();
    if (!kg.has_relation(anchor->relation)) {
      st.skipped_templates.push_back(sid + " (relation '" + anchor->relation +
                                     "' not in KG)");
      continue;
    }
    SeedPool sp;
    sp.paraphrases = &by_seed[sid];
    sp.pool = enumerate_bindings(kg, *anchor);
    sp.qtype = anchor->qtype;
    if (sp.pool.bindings.empty()) {
      st.skipped_templates.push_back(sid + " (no satisfiable bindings)");
      continue;
    }
    sp.order.resize(sp.pool.bindings.size());
    std::iota(sp.order.begin(), sp.order.end(), 0);
    Rng srng = rng.fork(fnv1a(sid));
    srng.shuffle(sp.order);
    pools.push_back(std::move(sp));
  }

  std::vector<QAInstance> out;
  if (target_count == 0) return out;

  // per-type quotas with deterministic round-robin over that type's seeds;
  // leftover quota spills into whichever types still have capacity
  auto emit_group = [&](SeedPool& sp) -> std::size_t {
    const std::size_t bi = sp.order[sp.next++];
    const SlotBinding& b = sp.pool.bindings[bi];
    const AnswerSet& a = sp.pool.answers[bi];
    std::size_t added = 0;
    for (const QuestionTemplate* t : *sp.paraphrases) {
      out.push_back(realize(*t, b, a, kg));
      ++added;
    }
    st.per_type[static_cast<int>(sp.qtype)] += added;
    return added;
  };

  const std::size_t quota = target_count / 5;
  for (int ty = 0; ty < 5; ++ty) {
    std::vector<SeedPool*> mine;
    for (auto& sp : pools)
      if (static_cast<int>(sp.qtype) == ty) mine.push_back(&sp);
    if (mine.empty()) continue;
    std::size_t produced = 0;
    bool progress = true;
    while (produced < quota && progress) {
      progress = false;
      for (auto* sp : mine) {
        if (produced >= quota) break;
        if (sp->next >= sp->order.size()) continue;
        produced += emit_group(*sp);
        progress = true;
      }
    }
  }
  // spill pass
  bool progress = true;
  while (out.size() < target_count && progress) {
    progress = false;
    for (auto& sp : pools) {
      if (out.size() >= target_count) break;
      if (sp.next >= sp.order.size()) continue;
      emit_group(sp);
      progress = true;
    }
  }

  st.generated = out.size();
  assign_splits(out, split);
  return out;
}

// ----------------------------------------------------------------- splits

namespace {

// reconstructs the slot values of an instance by matching the question
// against its template's literal segments
struct MatchedSlots {
  std::map<std::string, std::string> values;  // slot name -> surface string
  bool ok = false;
};

MatchedSlots match_template(const std::string& question, const std::string& tmpl_text) {
  MatchedSlots m;
  std::vector<std::string> literals;
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = tmpl_text.find('{', pos);
    if (open == std::string::npos) {
      literals.push_back(tmpl_text.substr(pos));
      break;
    }
    literals.push_back(tmpl_text.substr(pos, open - pos));
    std::size_t close = tmpl_text.find('}', open);
    slots.push_back(tmpl_text.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  // question = literals[0] + value0 + literals[1] + value1 + ... + literals[n]
  std::size_t qpos = 0;
  if (question.rfind(literals[0], 0) != 0) return m;
  qpos = literals[0].size();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string& next_lit = literals[i + 1];
    std::size_t end;
    if (next_lit.empty()) {
      end = (i + 1 == slots.size()) ? question.size() : std::string::npos;
      if (end == std::string::npos) return m;
    } else {
      end = question.find(next_lit, qpos);
      if (end == std::string::npos) return m;
    }
    m.values[slots[i]] = question.substr(qpos, end - qpos);
    qpos = end + next_lit.size();
  }
  if (qpos != question.size()) return m;
  m.ok = true;
  return m;
}

const QuestionTemplate* find_template(const std::vector<QuestionTemplate>& catalog,
                                      const std::string& paraphrase_id) {
  for (const auto& t : catalog)
    if (t.paraphrase_id == paraphrase_id) return &t;
  return nullptr;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::optional<std::map<std::string, std::string>> match_template_slots(
    const std::string& question, const std::string& template_text) {
  MatchedSlots m = match_template(question, template_text);
  if (!m.ok) return std::nullopt;
  return m.values;
}

std::string paraphrase_group_key(const QAInstance& inst) {
  // observable reconstruction: seed + mention ids + years + the type/adj
  // words recovered from the template match
  const QuestionTemplate* t = find_template(builtin_templates(), inst.paraphrase_id);
  std::string extra;
  if (t != nullptr) {
    MatchedSlots m = match_template(inst.question, t->text);
    if (m.ok) {
      if (m.values.count("type")) extra += "|" + m.values["type"];
      if (m.values.count("adj")) extra += "|" + m.values["adj"];
    }
  }
  std::ostringstream os;
  os << inst.seed_id;
  for (const auto& e : inst.entities) os << "|e" << e.id;
  for (const auto& tm : inst.times) os << "|y" << tm.year;
  os << extra;
  return os.str();
}

void assign_splits(std::vector<QAInstance>& instances, const SplitSpec& split) {
  split.validate();
  if (instances.empty()) return;

  // paraphrase groups
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i)
    groups[paraphrase_group_key(instances[i])].push_back(i);

  // union-find over groups sharing a non-event mentioned entity
  std::vector<const std::vector<std::size_t>*> group_list;
  std::vector<std::string> group_keys;
  for (auto& [k, v] : groups) {
    group_keys.push_back(k);
    group_list.push_back(&v);
  }
  DisjointSet ds(group_list.size());
  {
    std::unordered_map<EntityId, std::size_t> first_group_of_entity;
    for (std::size_t g = 0; g < group_list.size(); ++g) {
      for (std::size_t ii : *group_list[g]) {
        for (const auto& em : instances[ii].entities) {
          if (em.is_event) continue;
          auto [it, fresh] = first_group_of_entity.emplace(em.id, g);
          if (!fresh) ds.unite(g, it->second);
        }
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> comps;  // root -> group ids
  for (std::size_t g = 0; g < group_list.size(); ++g) comps[ds.find(g)].push_back(g);

  struct Comp {
    std::vector<std::size_t> group_ids;
    std::size_t n_instances = 0;
    std::string min_key;
  };
  std::vector<Comp> components;
  for (auto& [root, gids] : comps) {
    Comp c;
    c.group_ids = gids;
    c.min_key = group_keys[gids.front()];
    for (auto g : gids) {
      c.n_instances += group_list[g]->size();
      c.min_key = std::min(c.min_key, group_keys[g]);
    }
    components.push_back(std::move(c));
  }
  std::sort(components.begin(), components.end(), [](const Comp& a, const Comp& b) {
    if (a.n_instances != b.n_instances) return a.n_instances > b.n_instances;
    return a.min_key < b.min_key;
  });

  const double n = static_cast<double>(instances.size());
  const double train_target = split.train * n;
  const double eval_target = (split.dev + split.test) * n;

  double train_got = 0, eval_got = 0;
  std::vector<const Comp*> eval_comps;
  for (const auto& c : components) {
    const double train_deficit = train_target - train_got;
    const double eval_deficit = eval_target - eval_got;
    if (train_deficit >= eval_deficit) {
      for (auto g : c.group_ids)
        for (auto ii : *group_list[g]) instances[ii].split = "train";
      train_got += static_cast<double>(c.n_instances);
    } else {
      eval_comps.push_back(&c);
      eval_got += static_cast<double>(c.n_instances);
    }
  }

  // second level: dev vs test within the eval side
  const double dev_target = split.dev * n;
  const double test_target = split.test * n;
  double dev_got = 0, test_got = 0;
  for (const Comp* c : eval_comps) {
    const bool to_dev = (dev_target - dev_got) >= (test_target - test_got);
    for (auto g : c->group_ids)
      for (auto ii : *group_list[g]) instances[ii].split = to_dev ? "dev" : "test";
    (to_dev ? dev_got : test_got) += static_cast<double>(c->n_instances);
  }

  // feasibility: the co-mention graph must allow fractions near the request
  const double deviation = std::abs(train_got - train_target) / n;
  if (deviation > 0.2 || (eval_target > 0 && eval_got == 0) || train_got == 0) {
    std::size_t conflicts = 0;
    for (const auto& c : components)
      if (static_cast<double>(c.n_instances) > std::min(train_target, eval_target)) ++conflicts;
    throw std::runtime_error(
        "assign_splits: entity co-mention graph too connected for the requested fractions (" +
        std::to_string(conflicts) + " oversized components, largest " +
        std::to_string(components.empty() ? 0 : components.front().n_instances) + " of " +
        std::to_string(instances.size()) + " instances)");
  }

  // strip train-only annotations from dev/test
  for (auto& inst : instances) {
    if (inst.split != "train") {
      inst.head_label.clear();
      inst.tail_label.clear();
      inst.time_annotation = kUnboundYear;
    }
  }
}

// --------------------------------------------------------------------- io

void write_dataset(const std::vector<QAInstance>& instances, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& inst : instances) {
    nlohmann::ordered_json j;
    j["question"] = inst.question;
    j["seed_id"] = inst.seed_id;
    j["paraphrase_id"] = inst.paraphrase_id;
    j["qtype"] = reasoning_type_name(inst.qtype);
    j["answer_kind"] = answer_kind_name(inst.answer_kind);
    nlohmann::ordered_json ents = nlohmann::ordered_json::array();
    for (const auto& e : inst.entities)
      ents.push_back({{"mention", e.mention}, {"span", {e.begin, e.end}}, {"id", e.id}});
    j["entities"] = ents;
    nlohmann::ordered_json tms = nlohmann::ordered_json::array();
    for (const auto& t : inst.times)
      tms.push_back({{"mention", t.mention}, {"span", {t.begin, t.end}}, {"year", t.year}});
    j["times"] = tms;
    nlohmann::ordered_json ans = nlohmann::ordered_json::array();
    if (inst.answer_kind == AnswerKind::kEntity)
      for (const auto& label : inst.answer_labels) ans.push_back(label);
    else
      for (int y : inst.answers.years) ans.push_back(y);
    j["answers"] = ans;
    j["split"] = inst.split;
    if (inst.split == "train") {
      if (!inst.head_label.empty()) j["head"] = inst.head_label;
      if (!inst.tail_label.empty()) j["tail"] = inst.tail_label;
      if (inst.time_annotation != kUnboundYear) j["time"] = inst.time_annotation;
    }
    out << j.dump() << '\n';
  }
}

std::vector<QAInstance> read_dataset(const std::string& path, const TemporalKG& kg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<QAInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    QAInstance inst;
    inst.question = j.at("question").get<std::string>();
    inst.seed_id = j.at("seed_id").get<std::string>();
    inst.paraphrase_id = j.at("paraphrase_id").get<std::string>();
    inst.qtype = reasoning_type_from_name(j.at("qtype").get<std::string>());
    inst.answer_kind = answer_kind_from_name(j.at("answer_kind").get<std::string>());
    for (const auto& e : j.at("entities")) {
      EntityMention m;
      m.mention = e.at("mention").get<std::string>();
      m.begin = e.at("span")[0].get<std::size_t>();
      m.end = e.at("span")[1].get<std::size_t>();
      m.id = e.at("id").get<EntityId>();
      inst.entities.push_back(std::move(m));
    }
    for (const auto& t : j.at("times")) {
      TimeMention m;
      m.mention = t.at("mention").get<std::string>();
      m.begin = t.at("span")[0].get<std::size_t>();
      m.end = t.at("span")[1].get<std::size_t>();
      m.year = t.at("year").get<int>();
      inst.times.push_back(std::move(m));
    }
    for (auto& em : inst.entities) em.is_event = kg.is_event_entity(em.id);
    inst.answers.kind = inst.answer_kind;
    for (const auto& a : j.at("answers")) {
      if (inst.answer_kind == AnswerKind::kEntity) {
        inst.answer_labels.push_back(a.get<std::string>());
        inst.answers.entities.push_back(kg.entity_id(a.get<std::string>()));
      } else {
        inst.answers.years.push_back(a.get<int>());
      }
    }
    inst.split = j.at("split").get<std::string>();
    if (j.contains("head")) inst.head_label = j["head"].get<std::string>();
    if (j.contains("tail")) inst.tail_label = j["tail"].get<std::string>();
    if (j.contains("time")) inst.time_annotation = j["time"].get<int>();
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace tkgqa
