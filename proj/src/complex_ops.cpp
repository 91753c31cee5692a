#include "tkgqa/complex_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tkgqa/kernels.hpp"

namespace tkgqa {

namespace {

void check_dims(std::initializer_list<CxView> vs) {
  std::size_t d = vs.begin()->n;
  for (const auto& v : vs)
    if (v.n != d) throw std::invalid_argument("complex vector dimension mismatch");
}

}  // namespace

std::string model_tag_name(ModelTag tag) {
  switch (tag) {
    case ModelTag::kComplex: return "complex";
    case ModelTag::kTComplex: return "tcomplex";
    case ModelTag::kTNTComplex: return "tntcomplex";
    case ModelTag::kTimePlex: return "timeplex";
  }
  throw std::invalid_argument("bad model tag");
}

ModelTag model_tag_from_name(const std::string& name) {
  if (name == "complex") return ModelTag::kComplex;
  if (name == "tcomplex") return ModelTag::kTComplex;
  if (name == "tntcomplex") return ModelTag::kTNTComplex;
  if (name == "timeplex") return ModelTag::kTimePlex;
  throw std::invalid_argument("unknown model tag: " + name);
}

ComplexVec cmul(CxView a, CxView b) {
  check_dims({a, b});
  ComplexVec out(a.n);
  kernels::active().cmul(a.re, a.im, b.re, b.im, out.re.data(), out.im.data(), a.n);
  return out;
}

ComplexVec cmul_conj(CxView a, CxView b) {
  check_dims({a, b});
  // a * conj(b): reuse cmul with the imaginary plane of b negated
  ComplexVec nb(b.n);
  for (std::size_t d = 0; d < b.n; ++d) {
    nb.re[d] = b.re[d];
    nb.im[d] = -b.im[d];
  }
  return cmul(a, view(nb));
}

ComplexVec conj(CxView a) {
  ComplexVec out(a.n);
  for (std::size_t d = 0; d < a.n; ++d) {
    out.re[d] = a.re[d];
    out.im[d] = -a.im[d];
  }
  return out;
}

double complex_score(CxView u_s, CxView v_r, CxView u_o) {
  check_dims({u_s, v_r, u_o});
  ComplexVec c = cmul(u_s, v_r);
  return kernels::active().redot(c.re.data(), c.im.data(), u_o.re, u_o.im, c.dim());
}

double tcomplex_score(CxView u_s, CxView v_r, CxView u_o, CxView w_t) {
  check_dims({u_s, v_r, u_o, w_t});
  ComplexVec c = cmul(u_s, v_r);
  ComplexVec c2 = cmul(view(c), w_t);
  return kernels::active().redot(c2.re.data(), c2.im.data(), u_o.re, u_o.im, c2.dim());
}

double tntcomplex_score(CxView u_s, CxView v_r_time, CxView v_r_static, CxView u_o, CxView w_t) {
  check_dims({u_s, v_r_time, v_r_static, u_o, w_t});
  return tcomplex_score(u_s, v_r_time, u_o, w_t) + complex_score(u_s, v_r_static, u_o);
}

double timeplex_score(CxView u_s, CxView v_so, CxView v_st, CxView v_ot,
                      CxView u_o, CxView u_t, const TimeplexWeights& w) {
  check_dims({u_s, v_so, v_st, v_ot, u_o, u_t});
  const double so = complex_score(u_s, v_so, u_o);
  const double st = complex_score(u_s, v_st, u_t);
  const double ot = complex_score(u_o, v_ot, u_t);
  const double sot = complex_score(u_s, u_o, u_t);
  return so + w.alpha * st + w.beta * ot + w.gamma * sot;
}

std::vector<double> entity_scores(const std::vector<double>& qe_ent, CxView u_s,
                                  CxView w_t, const ComplexTable& entities) {
  CxView q = interp_view(qe_ent);
  check_dims({q, u_s, w_t});
  if (entities.dim != q.n) throw std::invalid_argument("entity table dimension mismatch");
  // Eq. 4 factor order <u_s, qe, conj(u_e), w_t>: fold u_s*qe, then *w_t,
  // then real-dot against each conjugated entity row.
  ComplexVec c = cmul(u_s, q);
  ComplexVec c2 = cmul(view(c), w_t);
  std::vector<double> out(entities.rows);
  kernels::active().score_rows_conj(c2.re.data(), c2.im.data(), entities.re.data(),
                                    entities.im.data(), entities.rows, entities.dim,
                                    out.data());
  return out;
}

std::vector<double> time_scores(const std::vector<double>& qe_time, CxView u_s,
                                CxView u_o, const ComplexTable& timestamps) {
  CxView q = interp_view(qe_time);
  check_dims({q, u_s, u_o});
  if (timestamps.dim != q.n) throw std::invalid_argument("timestamp table dimension mismatch");
  // Eq. 5 factor order <u_s, qe, conj(u_o), w_t>: fold u_s*qe, multiply each
  // candidate w_t in the middle slot, real-dot against conj(u_o).
  ComplexVec m = cmul(u_s, q);
  std::vector<double> out(timestamps.rows);
  kernels::active().score_rows_mid(m.re.data(), m.im.data(), u_o.re, u_o.im,
                                   timestamps.re.data(), timestamps.im.data(),
                                   timestamps.rows, timestamps.dim, out.data());
  return out;
}

void softmax_inplace(double* scores, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, scores[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::exp(scores[i] - mx);
    z += scores[i];
  }
  for (std::size_t i = 0; i < n; ++i) scores[i] /= z;
}

void softmax_inplace(std::vector<double>& scores) {
  softmax_inplace(scores.data(), scores.size());
}

std::vector<double> answer_distribution(const std::vector<double>& entity_scores,
                                        const std::vector<double>& time_scores) {
  if (entity_scores.size() < 2 && time_scores.size() < 2)
    throw std::invalid_argument("answer_distribution: all candidate slots are masked");
  std::vector<double> combined;
  combined.reserve(entity_scores.size() + time_scores.size());
  // index 0 of each table is the DUMMY sentinel; it is never an answer
  for (std::size_t i = 1; i < entity_scores.size(); ++i) combined.push_back(entity_scores[i]);
  for (std::size_t i = 1; i < time_scores.size(); ++i) combined.push_back(time_scores[i]);
  for (double s : combined)
    if (!std::isfinite(s)) throw std::invalid_argument("answer_distribution: non-finite score");
  softmax_inplace(combined);
  return combined;
}

std::vector<double> expand_complex(const ComplexVec& v) {
  std::vector<double> out(2 * v.dim());
  std::copy(v.re.begin(), v.re.end(), out.begin());
  std::copy(v.im.begin(), v.im.end(), out.begin() + static_cast<std::ptrdiff_t>(v.dim()));
  return out;
}

ComplexVec interp_expanded(const std::vector<double>& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("interp: odd-length input");
  const std::size_t d = x.size() / 2;
  ComplexVec v(d);
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(d), v.re.begin());
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(d), x.end(), v.im.begin());
  return v;
}

CxView interp_view(const double* data, std::size_t len2d) {
  if (len2d % 2 != 0) throw std::invalid_argument("interp: odd-length input");
  return {data, data + len2d / 2, len2d / 2};
}

CxView interp_view(const std::vector<double>& x) { return interp_view(x.data(), x.size()); }

// ---------------------------------------------------------------- gradients
//
// Every score is multilinear; the partial w.r.t. one complex argument x with
// the remaining factors folded into m is:
//   d Re(sum x*m) / dx      -> (m_re, -m_im)
//   d Re(sum a*conj(x)) / dx -> (a_re,  a_im)

namespace {

ComplexVec grad_holomorphic(const ComplexVec& m) {
  ComplexVec g(m.dim());
  for (std::size_t d = 0; d < m.dim(); ++d) {
    g.re[d] = m.re[d];
    g.im[d] = -m.im[d];
  }
  return g;
}

void add_scaled(ComplexVec& acc, const ComplexVec& x, double w) {
  kernels::active().axpy2(w, x.re.data(), x.im.data(), acc.re.data(), acc.im.data(), x.dim());
}

}  // namespace

ScoreGradients complex_score_grad(CxView u_s, CxView v_r, CxView u_o) {
  check_dims({u_s, v_r, u_o});
  ScoreGradients g;
  g.wrt.push_back(grad_holomorphic(cmul_conj(v_r, u_o)));  // d/d u_s
  g.wrt.push_back(grad_holomorphic(cmul_conj(u_s, u_o)));  // d/d v_r
  ComplexVec sr = cmul(u_s, v_r);                          // d/d u_o: conj slot
  g.wrt.push_back(sr);
  return g;
}

ScoreGradients tcomplex_score_grad(CxView u_s, CxView v_r, CxView u_o, CxView w_t) {
  check_dims({u_s, v_r, u_o, w_t});
  ScoreGradients g;
  ComplexVec rt = cmul(v_r, w_t);
  ComplexVec st = cmul(u_s, w_t);
  ComplexVec sr = cmul(u_s, v_r);
  g.wrt.push_back(grad_holomorphic(cmul_conj(view(rt), u_o)));  // d/d u_s
  g.wrt.push_back(grad_holomorphic(cmul_conj(view(st), u_o)));  // d/d v_r
  g.wrt.push_back(cmul(view(sr), w_t));                         // d/d u_o
  g.wrt.push_back(grad_holomorphic(cmul_conj(view(sr), u_o))); // d/d w_t
  return g;
}

ScoreGradients tntcomplex_score_grad(CxView u_s, CxView v_r_time, CxView v_r_static,
                                     CxView u_o, CxView w_t) {
  check_dims({u_s, v_r_time, v_r_static, u_o, w_t});
  ScoreGradients tg = tcomplex_score_grad(u_s, v_r_time, u_o, w_t);
  ScoreGradients cg = complex_score_grad(u_s, v_r_static, u_o);
  ScoreGradients g;
  ComplexVec d_s = tg.wrt[0];
  add_scaled(d_s, cg.wrt[0], 1.0);
  g.wrt.push_back(std::move(d_s));      // u_s appears in both parts
  g.wrt.push_back(tg.wrt[1]);           // v_r_time
  g.wrt.push_back(cg.wrt[1]);           // v_r_static
  ComplexVec d_o = tg.wrt[2];
  add_scaled(d_o, cg.wrt[2], 1.0);
  g.wrt.push_back(std::move(d_o));      // u_o
  g.wrt.push_back(tg.wrt[3]);           // w_t
  return g;
}

ScoreGradients timeplex_score_grad(CxView u_s, CxView v_so, CxView v_st, CxView v_ot,
                                   CxView u_o, CxView u_t, const TimeplexWeights& w) {
  check_dims({u_s, v_so, v_st, v_ot, u_o, u_t});
  const std::size_t D = u_s.n;
  ScoreGradients g;
  for (int i = 0; i < 6; ++i) g.wrt.emplace_back(D);

  ScoreGradients so = complex_score_grad(u_s, v_so, u_o);
  ScoreGradients st = complex_score_grad(u_s, v_st, u_t);
  ScoreGradients ot = complex_score_grad(u_o, v_ot, u_t);
  ScoreGradients sot = complex_score_grad(u_s, u_o, u_t);

  add_scaled(g.wrt[0], so.wrt[0], 1.0);        // u_s: SO
  add_scaled(g.wrt[0], st.wrt[0], w.alpha);    //      ST
  add_scaled(g.wrt[0], sot.wrt[0], w.gamma);   //      SOT
  add_scaled(g.wrt[1], so.wrt[1], 1.0);        // v_so
  add_scaled(g.wrt[2], st.wrt[1], w.alpha);    // v_st
  add_scaled(g.wrt[3], ot.wrt[1], w.beta);     // v_ot
  add_scaled(g.wrt[4], so.wrt[2], 1.0);        // u_o: SO conj slot
  add_scaled(g.wrt[4], ot.wrt[0], w.beta);     //      OT subject slot
  add_scaled(g.wrt[4], sot.wrt[1], w.gamma);   //      SOT middle slot
  add_scaled(g.wrt[5], st.wrt[2], w.alpha);    // u_t: ST conj slot
  add_scaled(g.wrt[5], ot.wrt[2], w.beta);     //      OT conj slot
  add_scaled(g.wrt[5], sot.wrt[2], w.gamma);   //      SOT conj slot
  return g;
}

double score_value(ModelTag tag, const std::vector<CxView>& in, const TimeplexWeights& w) {
  switch (tag) {
    case ModelTag::kComplex: return complex_score(in.at(0), in.at(1), in.at(2));
    case ModelTag::kTComplex: return tcomplex_score(in.at(0), in.at(1), in.at(2), in.at(3));
    case ModelTag::kTNTComplex:
      return tntcomplex_score(in.at(0), in.at(1), in.at(2), in.at(3), in.at(4));
    case ModelTag::kTimePlex:
      return timeplex_score(in.at(0), in.at(1), in.at(2), in.at(3), in.at(4), in.at(5), w);
  }
  throw std::invalid_argument("bad model tag");
}

ScoreGradients score_gradients(ModelTag tag, const std::vector<CxView>& in,
                               const TimeplexWeights& w) {
  switch (tag) {
    case ModelTag::kComplex: return complex_score_grad(in.at(0), in.at(1), in.at(2));
    case ModelTag::kTComplex:
      return tcomplex_score_grad(in.at(0), in.at(1), in.at(2), in.at(3));
    case ModelTag::kTNTComplex:
      return tntcomplex_score_grad(in.at(0), in.at(1), in.at(2), in.at(3), in.at(4));
    case ModelTag::kTimePlex:
      return timeplex_score_grad(in.at(0), in.at(1), in.at(2), in.at(3), in.at(4), in.at(5), w);
  }
  throw std::invalid_argument("bad model tag");
}

}  // namespace tkgqa
