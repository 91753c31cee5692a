#include "tkgqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tkgqa/parallel.hpp"
#include "tkgqa/rng.hpp"

namespace tkgqa {

int hits_at_k(const std::vector<std::size_t>& ranked_slots,
              const std::vector<std::size_t>& gold_slots, std::size_t k) {
  if (k < 1) throw std::invalid_argument("hits_at_k: k must be >= 1");
  if (gold_slots.empty()) throw std::invalid_argument("hits_at_k: empty gold set");
  const std::size_t n = std::min(k, ranked_slots.size());
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(gold_slots.begin(), gold_slots.end(), ranked_slots[i]) != gold_slots.end())
      return 1;
  return 0;
}

namespace {

struct RawCounts {
  std::size_t n = 0;
  std::size_t h1 = 0, h10 = 0;
};

StratumMetrics finalize(const RawCounts& c) {
  StratumMetrics m;
  m.count = c.n;
  if (c.n > 0) {
    m.hits1 = static_cast<double>(c.h1) / static_cast<double>(c.n);
    m.hits10 = static_cast<double>(c.h10) / static_cast<double>(c.n);
  }
  return m;
}

}  // namespace

EvalReport stratified_eval(const QAModel& model, const std::vector<QAInstance>& instances,
                           const TemporalKG& kg, const std::string& split_name,
                           const std::string& config_fingerprint, int threads) {
  EvalReport rep;
  rep.split = split_name;
  rep.config_fingerprint = config_fingerprint;

  const std::size_t chunk = 32;
  const std::size_t n_chunks = num_chunks(instances.size(), chunk);
  struct ChunkAgg {
    std::map<std::string, RawCounts> qtype, cls, ans;
    RawCounts overall;
  };
  std::vector<ChunkAgg> agg(n_chunks);

  parallel_chunks(instances.size(), chunk, resolve_threads(threads),
                  [&](std::size_t c, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const QAInstance& inst = instances[i];
      QaForward f = qa_forward(model, inst, kg);
      const auto gold = gold_slots(model, inst, kg);
      const std::size_t k = std::min<std::size_t>(10, f.probs.size());
      std::vector<std::size_t> idx(f.probs.size());
      for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (f.probs[a] != f.probs[b]) return f.probs[a] > f.probs[b];
                          return a < b;
                        });
      idx.resize(k);
      const int h1 = hits_at_k(idx, gold, 1);
      const int h10 = hits_at_k(idx, gold, 10);

      auto bump = [&](RawCounts& rc) {
        rc.n += 1;
        rc.h1 += static_cast<std::size_t>(h1);
        rc.h10 += static_cast<std::size_t>(h10);
      };
      bump(agg[c].overall);
      bump(agg[c].qtype[reasoning_type_name(inst.qtype)]);
      bump(agg[c].cls[is_simple(inst.qtype) ? "simple" : "complex"]);
      bump(agg[c].ans[answer_kind_name(inst.answer_kind)]);
    }
  });

  std::map<std::string, RawCounts> qtype, cls, ans;
  RawCounts overall;
  for (const auto& a : agg) {
    overall.n += a.overall.n;
    overall.h1 += a.overall.h1;
    overall.h10 += a.overall.h10;
    for (const auto& [k2, v] : a.qtype) {
      qtype[k2].n += v.n;
      qtype[k2].h1 += v.h1;
      qtype[k2].h10 += v.h10;
    }
    for (const auto& [k2, v] : a.cls) {
      cls[k2].n += v.n;
      cls[k2].h1 += v.h1;
      cls[k2].h10 += v.h10;
    }
    for (const auto& [k2, v] : a.ans) {
      ans[k2].n += v.n;
      ans[k2].h1 += v.h1;
      ans[k2].h10 += v.h10;
    }
  }
  rep.overall = finalize(overall);
  for (const auto& [k2, v] : qtype) rep.by_qtype[k2] = finalize(v);
  for (const auto& [k2, v] : cls) rep.by_class[k2] = finalize(v);
  for (const auto& [k2, v] : ans) rep.by_answer[k2] = finalize(v);
  return rep;
}

namespace {

nlohmann::ordered_json stratum_json(const StratumMetrics& m) {
  return {{"hits1", m.hits1}, {"hits10", m.hits10}, {"count", m.count}};
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "tkgqa-eval-report/v1";
  j["split"] = report.split;
  j["config_fingerprint"] = report.config_fingerprint;
  j["n"] = report.overall.count;
  j["overall"] = stratum_json(report.overall);
  nlohmann::ordered_json q, c, a;
  for (const auto& [k, v] : report.by_qtype) q[k] = stratum_json(v);
  for (const auto& [k, v] : report.by_class) c[k] = stratum_json(v);
  for (const auto& [k, v] : report.by_answer) a[k] = stratum_json(v);
  j["by_qtype"] = q;
  j["by_class"] = c;
  j["by_answer"] = a;
  return j;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  auto row = [&os](const std::string& name, const StratumMetrics& m) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %-16s hits@1 %6.3f   hits@10 %6.3f   n=%zu\n",
                  name.c_str(), m.hits1, m.hits10, m.count);
    os << buf;
  };
  os << "eval report (" << report.split << ")\n";
  row("overall", report.overall);
  os << " by question class\n";
  for (const auto& [k, v] : report.by_class) row(k, v);
  os << " by reasoning type\n";
  for (const auto& [k, v] : report.by_qtype) row(k, v);
  os << " by answer type\n";
  for (const auto& [k, v] : report.by_answer) row(k, v);
  return os.str();
}

std::vector<AblationPoint> size_ablation(
    const std::vector<double>& fractions, const std::vector<QAInstance>& train_fold,
    std::uint64_t seed,
    const std::function<EvalReport(const std::vector<QAInstance>&)>& train_and_eval) {
  if (fractions.empty()) throw std::invalid_argument("size_ablation: no fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] <= 0.0 || fractions[i] > 1.0)
      throw std::invalid_argument("size_ablation: fractions must lie in (0, 1]");
    if (i > 0 && fractions[i] <= fractions[i - 1])
      throw std::invalid_argument(
          "size_ablation: fractions must be strictly increasing (nested subsets)");
  }

  // one fixed shuffle; prefixes give nested subsets
  std::vector<QAInstance> shuffled = train_fold;
  Rng rng(seed ^ 0xab1a7e);
  rng.shuffle(shuffled);

  std::vector<AblationPoint> curve;
  for (double frac : fractions) {
    const std::size_t n =
        static_cast<std::size_t>(std::llround(frac * static_cast<double>(shuffled.size())));
    if (n < 100)
      throw std::invalid_argument("size_ablation: fraction " + std::to_string(frac) +
                                  " yields fewer than 100 training questions");
    std::vector<QAInstance> subset(shuffled.begin(),
                                   shuffled.begin() + static_cast<std::ptrdiff_t>(n));
    EvalReport rep = train_and_eval(subset);
    AblationPoint p;
    p.fraction = frac;
    p.n_train = n;
    p.hits1_overall = rep.overall.hits1;
    auto it_s = rep.by_class.find("simple");
    auto it_c = rep.by_class.find("complex");
    if (it_s != rep.by_class.end()) p.hits10_simple = it_s->second.hits10;
    if (it_c != rep.by_class.end()) p.hits10_complex = it_c->second.hits10;
    curve.push_back(p);
  }
  return curve;
}

std::string ablation_csv(const std::vector<AblationPoint>& curve) {
  std::ostringstream os;
  os << "fraction,n_train,hits10_simple,hits10_complex\n";
  for (const auto& p : curve) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.4f,%zu,%.6f,%.6f\n", p.fraction, p.n_train,
                  p.hits10_simple, p.hits10_complex);
    os << buf;
  }
  return os.str();
}

CxVsTcxReport cx_vs_tcx(const QAModel& cx_model, const QAModel& tcx_model,
                        const std::vector<QAInstance>& test_fold, const TemporalKG& kg,
                        const std::string& fingerprint, int threads) {
  if (cx_model.mode != QaMode::kEmbedKgqa || tcx_model.mode != QaMode::kCronKgqa)
    throw std::invalid_argument("cx_vs_tcx: expected an embedkgqa and a cronkgqa model");
  if (cx_model.n_entities() != tcx_model.n_entities() ||
      cx_model.n_timestamps() != tcx_model.n_timestamps())
    throw std::invalid_argument("cx_vs_tcx: mismatched KG vocabularies");
  CxVsTcxReport r;
  r.cx = stratified_eval(cx_model, test_fold, kg, "test", fingerprint, threads);
  r.tcx = stratified_eval(tcx_model, test_fold, kg, "test", fingerprint, threads);
  return r;
}

nlohmann::ordered_json cx_vs_tcx_json(const CxVsTcxReport& r) {
  auto h1 = [](const EvalReport& rep, const char* section,
               const char* key) -> nlohmann::ordered_json {
    const std::map<std::string, StratumMetrics>* m = nullptr;
    if (std::string(section) == "class") m = &rep.by_class;
    else m = &rep.by_answer;
    auto it = m->find(key);
    if (it == m->end()) return nullptr;
    return it->second.hits1;
  };
  nlohmann::ordered_json j;
  j["schema"] = "tkgqa-cx-vs-tcx/v1";
  j["config_fingerprint"] = r.cx.config_fingerprint;
  for (const char* key : {"simple", "complex"}) {
    j["rows"][key] = {{"cx", h1(r.cx, "class", key)}, {"tcx", h1(r.tcx, "class", key)}};
  }
  for (const char* key : {"entity", "time"}) {
    j["rows"][std::string(key) + "_answer"] = {{"cx", h1(r.cx, "answer", key)},
                                               {"tcx", h1(r.tcx, "answer", key)}};
  }
  j["rows"]["overall"] = {{"cx", r.cx.overall.hits1}, {"tcx", r.tcx.overall.hits1}};
  j["full"] = {{"cx", report_to_json(r.cx)}, {"tcx", report_to_json(r.tcx)}};
  return j;
}

std::string fingerprint_json(const nlohmann::ordered_json& config) {
  const std::string s = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace tkgqa
