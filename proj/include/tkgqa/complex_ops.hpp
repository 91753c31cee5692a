#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tkgqa {

// Complex vector as two parallel real arrays.
struct ComplexVec {
  std::vector<double> re, im;

  ComplexVec() = default;
  explicit ComplexVec(std::size_t d) : re(d, 0.0), im(d, 0.0) {}
  ComplexVec(std::vector<double> r, std::vector<double> i)
      : re(std::move(r)), im(std::move(i)) {
    if (re.size() != im.size()) throw std::invalid_argument("re/im length mismatch");
  }
  std::size_t dim() const { return re.size(); }
};

// Non-owning view into a complex vector or a table row.
struct CxView {
  const double* re = nullptr;
  const double* im = nullptr;
  std::size_t n = 0;
};

inline CxView view(const ComplexVec& v) { return {v.re.data(), v.im.data(), v.dim()}; }

// Row-major table of complex rows, planes stored separately.
struct ComplexTable {
  std::size_t rows = 0, dim = 0;
  std::vector<double> re, im;

  ComplexTable() = default;
  ComplexTable(std::size_t r, std::size_t d)
      : rows(r), dim(d), re(r * d, 0.0), im(r * d, 0.0) {}

  CxView row(std::size_t r) const { return {re.data() + r * dim, im.data() + r * dim, dim}; }
  double* row_re(std::size_t r) { return re.data() + r * dim; }
  double* row_im(std::size_t r) { return im.data() + r * dim; }
};

enum class ModelTag : std::uint8_t { kComplex = 0, kTComplex = 1, kTNTComplex = 2, kTimePlex = 3 };

std::string model_tag_name(ModelTag tag);
ModelTag model_tag_from_name(const std::string& name);

struct TimeplexWeights {
  double alpha = 1.0, beta = 1.0, gamma = 1.0;
};

// ---------------------------------------------------------------- scoring
// All scores are Re(<...>) of Hermitian products; per-dimension products are
// folded left-to-right in the order the factor list is written, the
// conjugated factor is consumed by the final real dot.

double complex_score(CxView u_s, CxView v_r, CxView u_o);
double tcomplex_score(CxView u_s, CxView v_r, CxView u_o, CxView w_t);
double tntcomplex_score(CxView u_s, CxView v_r_time, CxView v_r_static, CxView u_o, CxView w_t);
double timeplex_score(CxView u_s, CxView v_so, CxView v_st, CxView v_ot,
                      CxView u_o, CxView u_t, const TimeplexWeights& w);

// Eq-4-style scores for every row of `entities` (row 0 = DUMMY included).
// qe_ent is an expanded 2D real vector (first half re, second half im).
std::vector<double> entity_scores(const std::vector<double>& qe_ent, CxView u_s,
                                  CxView w_t, const ComplexTable& entities);

// Eq-5-style scores for every row of `timestamps`.
std::vector<double> time_scores(const std::vector<double>& qe_time, CxView u_s,
                                CxView u_o, const ComplexTable& timestamps);

// Softmax over [entity_scores ; time_scores] with the DUMMY slot (index 0 of
// each vector) removed. Returns probabilities of length
// (n_entities-1) + (n_timestamps-1); slot i maps to entity id i+1, slot
// (n_entities-1)+j maps to timestamp id j+1.
std::vector<double> answer_distribution(const std::vector<double>& entity_scores,
                                        const std::vector<double>& time_scores);

// numerically stable in-place softmax over an arbitrary score vector
void softmax_inplace(std::vector<double>& scores);
void softmax_inplace(double* scores, std::size_t n);

// ------------------------------------------------------- expand / interp
std::vector<double> expand_complex(const ComplexVec& v);
ComplexVec interp_expanded(const std::vector<double>& x);
CxView interp_view(const std::vector<double>& x);
CxView interp_view(const double* data, std::size_t len2d);

// ---------------------------------------------------------------- gradients
// Analytic gradients of each score w.r.t. every complex input, laid out in
// the argument order of the corresponding score function.
struct ScoreGradients {
  std::vector<ComplexVec> wrt;  // one entry per complex input argument
};

ScoreGradients complex_score_grad(CxView u_s, CxView v_r, CxView u_o);
ScoreGradients tcomplex_score_grad(CxView u_s, CxView v_r, CxView u_o, CxView w_t);
ScoreGradients tntcomplex_score_grad(CxView u_s, CxView v_r_time, CxView v_r_static,
                                     CxView u_o, CxView w_t);
ScoreGradients timeplex_score_grad(CxView u_s, CxView v_so, CxView v_st, CxView v_ot,
                                   CxView u_o, CxView u_t, const TimeplexWeights& w);

// Generic entry point keyed by model tag; `inputs` are the complex arguments
// in the same order the per-model functions take them.
ScoreGradients score_gradients(ModelTag tag, const std::vector<CxView>& inputs,
                               const TimeplexWeights& w = {});
double score_value(ModelTag tag, const std::vector<CxView>& inputs,
                   const TimeplexWeights& w = {});

// elementwise helpers (shared by training code)
ComplexVec cmul(CxView a, CxView b);          // a * b
ComplexVec cmul_conj(CxView a, CxView b);     // a * conj(b)
ComplexVec conj(CxView a);

}  // namespace tkgqa
