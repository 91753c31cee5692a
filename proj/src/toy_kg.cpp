// Synthetic temporal KG generator. Entities are grouped into blocks and
// facts stay inside a block, so questions generated later co-mention only
// in-block entities, which keeps the entity-disjoint train/test split
// feasible. Relation usage is balanced across the canonical relations.

#include <algorithm>
#include <array>
#include <iterator>
#include <stdexcept>
#include <unordered_map>

#include "tkgqa/rng.hpp"
#include "tkgqa/tkg.hpp"

namespace tkgqa {

namespace {

const char* kFirst[] = {"alva", "boris", "celia", "dmitri", "edith", "farid", "greta",
                        "hugo", "ines", "jonas", "katya", "liam", "mira", "nils",
                        "oona", "pavel", "quinn", "rosa", "sven", "tessa", "umar",
                        "vera", "wim", "xenia", "yuri", "zelda"};
const char* kLast[] = {"abbott", "bruns", "calder", "dorsey", "ekman", "farkas", "gruber",
                       "hollis", "ivanov", "jensen", "kovacs", "lindt", "moreau", "novak",
                       "okafor", "quist", "rollins", "sandoval", "tanaka", "urbina",
                       "vogel", "wexler", "yoon", "zhao"};
const char* kPlace[] = {"aldersgate", "brimfield", "calderbay", "dunmore", "eastvale",
                        "fernhill", "grayport", "hollowbrook", "ironvale", "kestrel",
                        "longmere", "mapleton", "northwick", "oakhurst", "pinewall",
                        "quarry_end", "redmoor", "silverford", "thornbury", "umberfield"};
const char* kTeamPrefix[] = {"fc", "ac", "sc", "united", "rovers", "athletic"};
const char* kPosition[] = {"mayor", "governor", "chancellor", "prefect", "warden",
                           "provost", "consul", "steward"};
const char* kAwardA[] = {"golden", "silver", "crimson", "emerald", "ivory", "cobalt"};
const char* kAwardB[] = {"finch_prize", "laurel_medal", "compass_award", "quill_prize",
                         "anchor_medal", "gale_trophy"};
const char* kOrgA[] = {"northwind", "harborlight", "stonebridge", "clearwater", "summit",
                       "lakeshore", "ridgeline", "fairwater"};
const char* kOrgB[] = {"labs", "press", "works", "consortium", "institute", "foundry"};
const char* kEventName[] = {"great_flood", "border_crisis", "silver_summit", "harbor_accord",
                            "coastal_blockade", "grain_embargo", "twin_storms", "glass_treaty",
                            "amber_expedition", "meridian_eclipse", "iron_strike",
                            "northern_drought"};

std::string person_name(std::size_t i) {
  const std::size_t nf = std::size(kFirst), nl = std::size(kLast);
  std::string s = std::string(kFirst[i % nf]) + "_" + kLast[(i / nf) % nl];
  if (i >= nf * nl) s += "_" + std::to_string(i / (nf * nl) + 1);
  return s;
}

std::string indexed(const char* const* a, std::size_t na, const char* const* b,
                    std::size_t nb, std::size_t i, const char* joiner) {
  std::string s = std::string(a[i % na]) + joiner + b[(i / na) % nb];
  if (i >= na * nb) s += "_" + std::to_string(i / (na * nb) + 1);
  return s;
}

struct FactDraft {
  std::string s, r, o;
  int a = 0, b = 0;
  bool event = false;
};

}  // namespace

const std::vector<std::string>& canonical_relations() {
  static const std::vector<std::string> rels = {
      "member of sports team", "position held", "award received", "spouse", "employer"};
  return rels;
}

TemporalKG generate_toy_kg(const ToyKgParams& p) {
  if (p.n_entities < 10) throw std::invalid_argument("generate_toy_kg: need n_entities >= 10");
  if (p.year_max <= p.year_min) throw std::invalid_argument("generate_toy_kg: empty year range");
  if (p.n_facts < p.n_entities)
    throw std::invalid_argument("generate_toy_kg: infeasible parameters (n_facts < n_entities)");
  if (p.n_relations == 0 || p.n_relations > 16)
    throw std::invalid_argument("generate_toy_kg: n_relations must be in [1,16]");

  Rng rng(p.seed);
  const int y0 = p.year_min, y1 = p.year_max;

  std::vector<std::string> relations;
  for (std::size_t r = 0; r < p.n_relations; ++r) {
    if (r < canonical_relations().size())
      relations.push_back(canonical_relations()[r]);
    else
      relations.push_back("relation_" + std::to_string(r));
  }

  // entity budget: 1 "occurred" placeholder + events + regular blocks
  const std::size_t n_events =
      std::max<std::size_t>(2, std::min<std::size_t>(12, p.n_entities / 25));
  const std::size_t n_regular = p.n_entities - n_events - 1;

  struct Block {
    std::vector<std::string> persons;
    std::string team, position, award, org;
  };
  // 12 entities per block: 8 persons + 4 role entities
  const std::size_t block_size = 12;
  const std::size_t n_blocks = std::max<std::size_t>(1, n_regular / block_size);

  std::vector<Block> blocks(n_blocks);
  std::size_t person_i = 0;
  {
    std::size_t remaining = n_regular;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      Block& blk = blocks[b];
      std::size_t quota = remaining / (n_blocks - b);
      if (quota < 5) quota = std::min<std::size_t>(remaining, 5);
      blk.team = indexed(kTeamPrefix, std::size(kTeamPrefix), kPlace, std::size(kPlace), b, "_");
      blk.position =
          indexed(kPosition, std::size(kPosition), kPlace, std::size(kPlace), b, "_of_");
      blk.award = indexed(kAwardA, std::size(kAwardA), kAwardB, std::size(kAwardB), b, "_");
      blk.org = indexed(kOrgA, std::size(kOrgA), kOrgB, std::size(kOrgB), b, "_");
      std::size_t persons = quota - 4;
      for (std::size_t k = 0; k < persons; ++k) blk.persons.push_back(person_name(person_i++));
      remaining -= quota;
    }
    // spill any remainder into the last block as persons
    while (remaining > 0) {
      blocks.back().persons.push_back(person_name(person_i++));
      --remaining;
    }
  }

  std::vector<FactDraft> drafts;
  auto emit = [&drafts](std::string s, std::string r, std::string o, int a, int b,
                        bool ev = false) {
    drafts.push_back({std::move(s), std::move(r), std::move(o), a, b, ev});
  };

  // --- event facts: intervals tiling the year range
  {
    const int span = y1 - y0;
    for (std::size_t e = 0; e < n_events; ++e) {
      std::string name = e < std::size(kEventName)
                             ? std::string(kEventName[e])
                             : "event_" + std::to_string(e);
      int a = y0 + static_cast<int>((span * e) / n_events);
      int len = 2 + static_cast<int>(rng.uniform_u64(6));
      int b = std::min(y1, a + len);
      emit(name, kEventRelationLabel, "occurred", a, b, true);
    }
  }

  // --- per-block relation structure
  const bool has[5] = {p.n_relations > 0, p.n_relations > 1, p.n_relations > 2,
                       p.n_relations > 3, p.n_relations > 4};
  for (auto& blk : blocks) {
    const auto& ps = blk.persons;
    if (ps.empty()) continue;

    // position held: a chain of consecutive holders (clean before/after)
    if (has[1]) {
      std::vector<std::string> order = ps;
      rng.shuffle(order);
      int year = y0 + static_cast<int>(rng.uniform_u64(6));
      for (const auto& person : order) {
        int len = 2 + static_cast<int>(rng.uniform_u64(7));
        int b = std::min(y1, year + len);
        if (year > y1) break;
        emit(person, relations[1], blk.position, year, b);
        year = b + 1 + static_cast<int>(rng.uniform_u64(3));
      }
    }

    // sports team: 1-3 stints per person, overlaps allowed (time join)
    if (has[0]) {
      for (const auto& person : ps) {
        int stints = 1 + static_cast<int>(rng.uniform_u64(3));
        int year = y0 + static_cast<int>(rng.uniform_u64(std::max(1, (y1 - y0) / 2)));
        for (int s = 0; s < stints && year <= y1; ++s) {
          int len = 2 + static_cast<int>(rng.uniform_u64(8));
          int b = std::min(y1, year + len);
          emit(person, relations[0], blk.team, year, b);
          year = b + 2 + static_cast<int>(rng.uniform_u64(5));
        }
      }
    }

    // awards: point facts
    if (has[2]) {
      for (const auto& person : ps) {
        int n_awards = 1 + static_cast<int>(rng.uniform_u64(2));
        for (int k = 0; k < n_awards; ++k) {
          int y = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(y1 - y0 + 1)));
          emit(person, relations[2], blk.award, y, y);
        }
      }
    }

    // spouse: sequential marriages between block persons
    if (has[3] && ps.size() >= 2) {
      for (std::size_t k = 0; k + 1 < ps.size(); k += 2) {
        int a = y0 + static_cast<int>(rng.uniform_u64(std::max(1, (y1 - y0) / 2)));
        int len = 3 + static_cast<int>(rng.uniform_u64(15));
        int b = std::min(y1, a + len);
        emit(ps[k], relations[3], ps[k + 1], a, b);
        // some remarry later
        if (rng.uniform01() < 0.4 && k + 2 < ps.size() && b + 2 < y1) {
          int a2 = b + 2 + static_cast<int>(rng.uniform_u64(4));
          if (a2 <= y1) {
            int b2 = std::min(y1, a2 + 3 + static_cast<int>(rng.uniform_u64(10)));
            emit(ps[k], relations[3], ps[k + 2], a2, b2);
          }
        }
      }
    }

    // employer: sequential job stints per person
    if (has[4]) {
      for (const auto& person : ps) {
        int year = y0 + static_cast<int>(rng.uniform_u64(8));
        int jobs = 1 + static_cast<int>(rng.uniform_u64(3));
        for (int s = 0; s < jobs && year <= y1; ++s) {
          int len = 3 + static_cast<int>(rng.uniform_u64(10));
          int b = std::min(y1, year + len);
          emit(person, relations[4], blk.org, year, b);
          year = b + 1 + static_cast<int>(rng.uniform_u64(3));
        }
      }
    }

    // extra relations beyond the canonical five: generic person->org facts
    for (std::size_t r = 5; r < p.n_relations; ++r) {
      for (const auto& person : ps) {
        int a = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(y1 - y0)));
        int b = std::min(y1, a + 1 + static_cast<int>(rng.uniform_u64(6)));
        emit(person, relations[r], blk.org, a, b);
      }
    }
  }

  // pin the declared year range: make sure some fact touches y0 and y1
  if (!drafts.empty()) {
    drafts.front().a = std::min(drafts.front().a, y0);
    bool touches_end = false;
    for (const auto& d : drafts) touches_end |= d.b == y1;
    if (!touches_end) {
      auto& d = drafts.back();
      d.b = y1;
      d.a = std::min(d.a, d.b);
    }
  }

  // --- trim or top up towards n_facts while keeping the invariants:
  // every entity in >= 1 fact, >= 2 event facts, balanced relations
  if (drafts.size() > p.n_facts) {
    // drop from the tail of a deterministic shuffle, protecting each
    // entity's first covering fact and all event facts
    std::vector<std::size_t> order(drafts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::unordered_map<std::string, int> cover;
    for (const auto& d : drafts) {
      cover[d.s]++;
      cover[d.o]++;
    }
    std::vector<bool> drop(drafts.size(), false);
    std::size_t excess = drafts.size() - p.n_facts;
    for (std::size_t idx : order) {
      if (excess == 0) break;
      const auto& d = drafts[idx];
      if (d.event) continue;
      if (cover[d.s] <= 1 || cover[d.o] <= 1) continue;
      drop[idx] = true;
      cover[d.s]--;
      cover[d.o]--;
      --excess;
    }
    std::vector<FactDraft> kept;
    kept.reserve(p.n_facts);
    for (std::size_t i = 0; i < drafts.size(); ++i)
      if (!drop[i]) kept.push_back(std::move(drafts[i]));
    drafts = std::move(kept);
  } else {
    // top up round-robin over relations so no relation dominates; position
    // facts continue each block's holder chain (wrapping into a new era
    // when the year range is exhausted)
    std::vector<int> chain_year(blocks.size(), -1);
    std::size_t i = 0;
    while (drafts.size() < p.n_facts) {
      const std::size_t r = i % std::min<std::size_t>(p.n_relations, 5);
      Block& blk = blocks[(i / 5) % blocks.size()];
      ++i;
      if (blk.persons.empty()) continue;
      const std::string& person = blk.persons[rng.uniform_u64(blk.persons.size())];
      const int span = y1 - y0;
      switch (r) {
        case 0: {
          int a = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(span)));
          int b = std::min(y1, a + 1 + static_cast<int>(rng.uniform_u64(8)));
          emit(person, relations[0], blk.team, a, b);
          break;
        }
        case 1: {
          std::size_t bi = static_cast<std::size_t>(&blk - blocks.data());
          if (chain_year[bi] < y0 || chain_year[bi] > y1)
            chain_year[bi] = y0 + static_cast<int>(rng.uniform_u64(4));
          int a = chain_year[bi];
          int b = std::min(y1, a + 2 + static_cast<int>(rng.uniform_u64(7)));
          emit(person, relations[1], blk.position, a, b);
          chain_year[bi] = b + 1 + static_cast<int>(rng.uniform_u64(3));
          break;
        }
        case 2: {
          int y = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(span + 1)));
          emit(person, relations[2], blk.award, y, y);
          break;
        }
        case 3: {
          if (blk.persons.size() < 2) break;
          const std::string& other = blk.persons[rng.uniform_u64(blk.persons.size())];
          if (other == person) break;
          int a = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(span)));
          int b = std::min(y1, a + 3 + static_cast<int>(rng.uniform_u64(12)));
          emit(person, relations[3], other, a, b);
          break;
        }
        default: {
          int a = y0 + static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(span)));
          int b = std::min(y1, a + 3 + static_cast<int>(rng.uniform_u64(9)));
          emit(person, relations[4 % p.n_relations], blk.org, a, b);
          break;
        }
      }
    }
  }

  std::vector<std::array<std::string, 3>> spo;
  std::vector<std::array<int, 2>> ivals;
  std::vector<bool> evts;
  for (const auto& d : drafts) {
    spo.push_back({d.s, d.r, d.o});
    ivals.push_back({d.a, d.b});
    evts.push_back(d.event);
  }
  return TemporalKG::build(spo, ivals, evts);
}

}  // namespace tkgqa
