#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tkgqa/qa_model.hpp"
#include "tkgqa/qgen.hpp"

namespace tkgqa {

// 1 iff any of the first k ranked answers is in the gold set; k >= 1
int hits_at_k(const std::vector<std::size_t>& ranked_slots,
              const std::vector<std::size_t>& gold_slots, std::size_t k);

struct StratumMetrics {
  double hits1 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::string split;
  std::string config_fingerprint;
  StratumMetrics overall;
  std::map<std::string, StratumMetrics> by_qtype;   // five fine types
  std::map<std::string, StratumMetrics> by_class;   // simple / complex
  std::map<std::string, StratumMetrics> by_answer;  // entity / time
};

// evaluates the instances of one split (empty strata stay absent, never 0)
EvalReport stratified_eval(const QAModel& model, const std::vector<QAInstance>& instances,
                           const TemporalKG& kg, const std::string& split_name,
                           const std::string& config_fingerprint, int threads = 0);

nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);  // human-readable rendering

// ------------------------------------------------------------- ablations
struct AblationPoint {
  double fraction = 0.0;
  std::size_t n_train = 0;
  double hits10_simple = 0.0;
  double hits10_complex = 0.0;
  double hits1_overall = 0.0;
};

// Runs the supplied train+eval pipeline once per fraction on nested prefix
// subsets of a fixed shuffle of the training fold. Fractions must be
// strictly increasing within (0, 1]; a fraction yielding fewer than 100
// training questions is an error.
std::vector<AblationPoint> size_ablation(
    const std::vector<double>& fractions, const std::vector<QAInstance>& train_fold,
    std::uint64_t seed,
    const std::function<EvalReport(const std::vector<QAInstance>&)>& train_and_eval);

std::string ablation_csv(const std::vector<AblationPoint>& curve);

// paired ComplEx-vs-TComplEx comparison (Table-5 shape)
struct CxVsTcxReport {
  EvalReport cx;
  EvalReport tcx;
};

CxVsTcxReport cx_vs_tcx(const QAModel& cx_model, const QAModel& tcx_model,
                        const std::vector<QAInstance>& test_fold, const TemporalKG& kg,
                        const std::string& fingerprint, int threads = 0);

nlohmann::ordered_json cx_vs_tcx_json(const CxVsTcxReport& r);

std::string fingerprint_json(const nlohmann::ordered_json& config);

}  // namespace tkgqa
