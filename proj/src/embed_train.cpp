#include "tkgqa/embed_train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "tkgqa/kernels.hpp"
#include "tkgqa/parallel.hpp"
#include "tkgqa/rng.hpp"

namespace tkgqa {

namespace {

std::uint64_t quad_key(EntityId s, std::uint32_t rr, EntityId o, TimestampId t) {
  // 20 + 12 + 20 + 12 bits; asserted against table sizes on construction
  return (static_cast<std::uint64_t>(s) << 44) | (static_cast<std::uint64_t>(rr) << 32) |
         (static_cast<std::uint64_t>(o) << 12) | t;
}

struct GradBuffers {
  ComplexTable ent, rel, ts;
  double loss = 0.0;

  void init(const EmbeddingSet& emb) {
    ent = ComplexTable(emb.entities.rows, emb.dim);
    rel = ComplexTable(emb.relations.rows, emb.dim);
    ts = ComplexTable(emb.timestamps.rows, emb.dim);
  }
  void clear() {
    auto z = [](std::vector<double>& v) { std::memset(v.data(), 0, v.size() * sizeof(double)); };
    z(ent.re);
    z(ent.im);
    z(rel.re);
    z(rel.im);
    z(ts.re);
    z(ts.im);
    loss = 0.0;
  }
  void add(const GradBuffers& other) {
    auto acc = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    acc(ent.re, other.ent.re);
    acc(ent.im, other.ent.im);
    acc(rel.re, other.rel.re);
    acc(rel.im, other.rel.im);
    acc(ts.re, other.ts.re);
    acc(ts.im, other.ts.im);
    loss += other.loss;
  }
};

void add_into(ComplexTable& table, std::size_t row, const ComplexVec& v, double w) {
  kernels::active().axpy2(w, v.re.data(), v.im.data(), table.row_re(row), table.row_im(row),
                          v.dim());
}

// N3 (cubed modulus) penalty and its gradient on one row
double n3_penalty_acc(const CxView& x, double w, double* g_re, double* g_im) {
  double p = 0.0;
  for (std::size_t d = 0; d < x.n; ++d) {
    const double mag = std::sqrt(x.re[d] * x.re[d] + x.im[d] * x.im[d]);
    p += mag * mag * mag;
    const double c = 3.0 * w * mag;
    g_re[d] += c * x.re[d];
    g_im[d] += c * x.im[d];
  }
  return w * p;
}

double n3_value(const CxView& x) {
  double p = 0.0;
  for (std::size_t d = 0; d < x.n; ++d) {
    const double mag = std::sqrt(x.re[d] * x.re[d] + x.im[d] * x.im[d]);
    p += mag * mag * mag;
  }
  return p;
}

struct TupleParts {
  // relation rows used by this tuple, in model part order
  std::size_t rows[3] = {0, 0, 0};
  int n_rows = 0;
  bool uses_time = false;
};

TupleParts tuple_parts(ModelTag tag, std::uint32_t rel_row, std::uint32_t R) {
  TupleParts tp;
  switch (tag) {
    case ModelTag::kComplex:
      tp.rows[0] = rel_row;
      tp.n_rows = 1;
      break;
    case ModelTag::kTComplex:
      tp.rows[0] = rel_row;
      tp.n_rows = 1;
      tp.uses_time = true;
      break;
    case ModelTag::kTNTComplex:
      tp.rows[0] = rel_row;            // time-sensitive
      tp.rows[1] = rel_row + 2 * R;    // static
      tp.n_rows = 2;
      tp.uses_time = true;
      break;
    case ModelTag::kTimePlex:
      tp.rows[0] = rel_row;            // SO
      tp.rows[1] = rel_row + 2 * R;    // ST (constant for object prediction)
      tp.rows[2] = rel_row + 4 * R;    // OT
      tp.n_rows = 3;
      tp.uses_time = true;
      break;
  }
  return tp;
}

ComplexVec scaled_conj(const ComplexVec& v, double w) {
  ComplexVec out(v.dim());
  for (std::size_t d = 0; d < v.dim(); ++d) {
    out.re[d] = w * v.re[d];
    out.im[d] = -w * v.im[d];
  }
  return out;
}

void add_vec(ComplexVec& a, const ComplexVec& b) {
  for (std::size_t d = 0; d < a.dim(); ++d) {
    a.re[d] += b.re[d];
    a.im[d] += b.im[d];
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (lr <= 0 || batch_size == 0 || epochs <= 0 || patience <= 0)
    throw std::invalid_argument("TrainConfig: lr, batch_size, epochs, patience must be positive");
  if (n3_weight < 0 || temporal_smooth < 0)
    throw std::invalid_argument("TrainConfig: regularizer weights must be non-negative");
  if (val_fraction <= 0 || val_fraction >= 1)
    throw std::invalid_argument("TrainConfig: val_fraction must be in (0,1)");
  if (init_scale <= 0) throw std::invalid_argument("TrainConfig: init_scale must be positive");
}

std::vector<Quad> expand_facts(const TemporalKG& kg, std::size_t max_expansion,
                               std::uint64_t sample_seed) {
  std::vector<Quad> out;
  Rng rng(sample_seed ^ 0x5eedULL);
  for (const auto& f : kg.facts()) {
    const std::size_t span = static_cast<std::size_t>(f.end - f.start + 1);
    if (max_expansion == 0 || span <= max_expansion) {
      for (int y = f.start; y <= f.end; ++y)
        out.push_back({f.subject, f.relation, f.object, kg.timestamp_of_year(y)});
    } else {
      // sample K distinct years uniformly, ascending
      std::vector<int> years(span);
      for (std::size_t i = 0; i < span; ++i) years[i] = f.start + static_cast<int>(i);
      rng.shuffle(years);
      years.resize(max_expansion);
      std::sort(years.begin(), years.end());
      for (int y : years) out.push_back({f.subject, f.relation, f.object, kg.timestamp_of_year(y)});
    }
  }
  return out;
}

std::vector<Quad> build_training_tuples(const TemporalKG& kg, ModelTag tag,
                                        const TrainConfig& cfg) {
  const std::uint32_t R = static_cast<std::uint32_t>(kg.n_relations());
  std::vector<Quad> fwd = expand_facts(kg, cfg.max_expansion, cfg.seed);
  std::vector<Quad> out;
  out.reserve(fwd.size() * 2);
  for (const auto& q : fwd) {
    out.push_back(q);
    out.push_back({q.o, q.rel_row + R, q.s, q.t});
  }
  if (tag == ModelTag::kComplex) {
    // the time factor is absent from the score: keep one instance per
    // (s, r, o), first year wins
    std::unordered_set<std::uint64_t> seen;
    std::vector<Quad> dedup;
    dedup.reserve(out.size());
    for (const auto& q : out)
      if (seen.insert(quad_key(q.s, q.rel_row, q.o, 0)).second) dedup.push_back(q);
    out = std::move(dedup);
  }
  return out;
}

TupleFilter::TupleFilter(const std::vector<Quad>& all_tuples) {
  keys_.reserve(all_tuples.size() * 2);
  for (const auto& q : all_tuples) keys_.insert(quad_key(q.s, q.rel_row, q.o, q.t));
}

bool TupleFilter::contains(EntityId s, std::uint32_t rr, EntityId o, TimestampId t) const {
  return keys_.count(quad_key(s, rr, o, t)) > 0;
}

ComplexVec object_prediction_coeffs(const EmbeddingSet& emb, const Quad& q,
                                    const TimeplexWeights& w) {
  const auto tp = tuple_parts(emb.tag, q.rel_row, emb.n_relations);
  const CxView u_s = emb.entities.row(q.s);
  switch (emb.tag) {
    case ModelTag::kComplex:
      return cmul(u_s, emb.relations.row(tp.rows[0]));
    case ModelTag::kTComplex: {
      ComplexVec sr = cmul(u_s, emb.relations.row(tp.rows[0]));
      return cmul(view(sr), emb.timestamps.row(q.t));
    }
    case ModelTag::kTNTComplex: {
      ComplexVec sr = cmul(u_s, emb.relations.row(tp.rows[0]));
      ComplexVec c = cmul(view(sr), emb.timestamps.row(q.t));
      ComplexVec cs = cmul(u_s, emb.relations.row(tp.rows[1]));
      add_vec(c, cs);
      return c;
    }
    case ModelTag::kTimePlex: {
      // score(e) = <u_s, v_so, conj(e)> + beta <e, v_ot, conj(u_t)>
      //          + gamma <u_s, e, conj(u_t)>  (the ST term is constant in e)
      const CxView u_t = emb.timestamps.row(q.t);
      ComplexVec c = cmul(u_s, emb.relations.row(tp.rows[0]));
      ComplexVec ot = cmul_conj(emb.relations.row(tp.rows[2]), u_t);
      add_vec(c, scaled_conj(ot, w.beta));
      ComplexVec st = cmul_conj(u_s, u_t);
      add_vec(c, scaled_conj(st, w.gamma));
      return c;
    }
  }
  throw std::invalid_argument("bad model tag");
}

namespace {

// gradient of the candidate-coefficient assembly: distributes g_c into the
// rows the tuple touches
void coeffs_backward(const EmbeddingSet& emb, const Quad& q, const ComplexVec& g_c,
                     const TimeplexWeights& w, GradBuffers& g) {
  const auto tp = tuple_parts(emb.tag, q.rel_row, emb.n_relations);
  const CxView u_s = emb.entities.row(q.s);
  switch (emb.tag) {
    case ModelTag::kComplex: {
      const CxView v = emb.relations.row(tp.rows[0]);
      add_into(g.ent, q.s, cmul_conj(view(g_c), v), 1.0);
      add_into(g.rel, tp.rows[0], cmul_conj(view(g_c), u_s), 1.0);
      break;
    }
    case ModelTag::kTComplex: {
      const CxView v = emb.relations.row(tp.rows[0]);
      const CxView wt = emb.timestamps.row(q.t);
      ComplexVec g1 = cmul_conj(view(g_c), wt);  // d/d (u_s * v_r)
      add_into(g.ent, q.s, cmul_conj(view(g1), v), 1.0);
      add_into(g.rel, tp.rows[0], cmul_conj(view(g1), u_s), 1.0);
      ComplexVec sr = cmul(u_s, v);
      add_into(g.ts, q.t, cmul_conj(view(g_c), view(sr)), 1.0);
      break;
    }
    case ModelTag::kTNTComplex: {
      const CxView vt = emb.relations.row(tp.rows[0]);
      const CxView vs = emb.relations.row(tp.rows[1]);
      const CxView wt = emb.timestamps.row(q.t);
      ComplexVec g1 = cmul_conj(view(g_c), wt);
      add_into(g.ent, q.s, cmul_conj(view(g1), vt), 1.0);
      add_into(g.rel, tp.rows[0], cmul_conj(view(g1), u_s), 1.0);
      ComplexVec sr = cmul(u_s, vt);
      add_into(g.ts, q.t, cmul_conj(view(g_c), view(sr)), 1.0);
      add_into(g.ent, q.s, cmul_conj(view(g_c), vs), 1.0);
      add_into(g.rel, tp.rows[1], cmul_conj(view(g_c), u_s), 1.0);
      break;
    }
    case ModelTag::kTimePlex: {
      const CxView v_so = emb.relations.row(tp.rows[0]);
      const CxView v_ot = emb.relations.row(tp.rows[2]);
      const CxView u_t = emb.timestamps.row(q.t);
      // part 1: u_s * v_so
      add_into(g.ent, q.s, cmul_conj(view(g_c), v_so), 1.0);
      add_into(g.rel, tp.rows[0], cmul_conj(view(g_c), u_s), 1.0);
      // part 2: beta * conj(v_ot * conj(u_t))
      ComplexVec g_x = scaled_conj(g_c, w.beta);
      add_into(g.rel, tp.rows[2], cmul(view(g_x), u_t), 1.0);
      ComplexVec d_y = cmul_conj(view(g_x), v_ot);
      add_into(g.ts, q.t, conj(view(d_y)), 1.0);
      // part 3: gamma * conj(u_s * conj(u_t))
      ComplexVec g_z = scaled_conj(g_c, w.gamma);
      add_into(g.ent, q.s, cmul(view(g_z), u_t), 1.0);
      ComplexVec d_y2 = cmul_conj(view(g_z), u_s);
      add_into(g.ts, q.t, conj(view(d_y2)), 1.0);
      break;
    }
  }
}

// cross entropy + its gradient for one tuple; returns loss, fills grads
double tuple_loss_grad(const EmbeddingSet& emb, const Quad& q, const TrainConfig& cfg,
                       double inv_batch, GradBuffers& g, std::vector<double>& scores,
                       std::vector<double>& dscore) {
  const std::size_t n_rows = emb.entities.rows;
  const auto& K = kernels::active();
  ComplexVec c = object_prediction_coeffs(emb, q, cfg.timeplex);
  scores.resize(n_rows);
  K.score_rows_conj(c.re.data(), c.im.data(), emb.entities.re.data(), emb.entities.im.data(),
                    n_rows, emb.dim, scores.data());

  // softmax over real entities (row 0 is DUMMY, excluded)
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 1; e < n_rows; ++e) mx = std::max(mx, scores[e]);
  double z = 0.0;
  for (std::size_t e = 1; e < n_rows; ++e) z += std::exp(scores[e] - mx);
  const double loss = (std::log(z) + mx - scores[q.o]) * inv_batch;

  dscore.resize(n_rows);
  dscore[0] = 0.0;
  const double inv_z = 1.0 / z;
  for (std::size_t e = 1; e < n_rows; ++e)
    dscore[e] = std::exp(scores[e] - mx) * inv_z * inv_batch;
  dscore[q.o] -= inv_batch;

  // entity rows as candidates: grad_row_e += dscore_e * c
  K.rank1_update(dscore.data(), c.re.data(), c.im.data(), g.ent.re.data(), g.ent.im.data(),
                 n_rows, emb.dim);

  // grad w.r.t. c, then into the tuple's rows
  ComplexVec g_c(emb.dim);
  K.weighted_rowsum(dscore.data(), emb.entities.re.data(), emb.entities.im.data(), n_rows,
                    emb.dim, g_c.re.data(), g_c.im.data());
  coeffs_backward(emb, q, g_c, cfg.timeplex, g);

  // N3 on the rows this tuple touches
  double reg = 0.0;
  const double wn3 = cfg.n3_weight * inv_batch;
  if (wn3 > 0.0) {
    const auto tp = tuple_parts(emb.tag, q.rel_row, emb.n_relations);
    reg += n3_penalty_acc(emb.entities.row(q.s), wn3, g.ent.row_re(q.s), g.ent.row_im(q.s));
    reg += n3_penalty_acc(emb.entities.row(q.o), wn3, g.ent.row_re(q.o), g.ent.row_im(q.o));
    for (int i = 0; i < tp.n_rows; ++i)
      reg += n3_penalty_acc(emb.relations.row(tp.rows[i]), wn3, g.rel.row_re(tp.rows[i]),
                            g.rel.row_im(tp.rows[i]));
    if (tp.uses_time)
      reg += n3_penalty_acc(emb.timestamps.row(q.t), wn3, g.ts.row_re(q.t), g.ts.row_im(q.t));
  }
  return loss + reg;
}

// temporal smoothing sum_t ||w_{t+1} - w_t||^2 / (T-1) over real timestamps
double smoothing_loss_grad(const EmbeddingSet& emb, double weight, GradBuffers* g) {
  const std::size_t T = emb.timestamps.rows - 1;
  if (T < 2 || weight == 0.0) return 0.0;
  const double scale = weight / static_cast<double>(T - 1);
  double loss = 0.0;
  for (std::size_t t = 1; t < T; ++t) {
    const CxView a = emb.timestamps.row(t);
    const CxView b = emb.timestamps.row(t + 1);
    for (std::size_t d = 0; d < emb.dim; ++d) {
      const double dre = b.re[d] - a.re[d];
      const double dim_ = b.im[d] - a.im[d];
      loss += scale * (dre * dre + dim_ * dim_);
      if (g) {
        g->ts.row_re(t)[d] -= 2.0 * scale * dre;
        g->ts.row_im(t)[d] -= 2.0 * scale * dim_;
        g->ts.row_re(t + 1)[d] += 2.0 * scale * dre;
        g->ts.row_im(t + 1)[d] += 2.0 * scale * dim_;
      }
    }
  }
  return loss;
}

struct Adagrad {
  ComplexTable ent, rel, ts;

  void init(const EmbeddingSet& emb) {
    ent = ComplexTable(emb.entities.rows, emb.dim);
    rel = ComplexTable(emb.relations.rows, emb.dim);
    ts = ComplexTable(emb.timestamps.rows, emb.dim);
  }

  static void apply(std::vector<double>& theta, const std::vector<double>& grad,
                    std::vector<double>& accum, double lr, double eps) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = grad[i];
      if (gi == 0.0) continue;
      accum[i] += gi * gi;
      theta[i] -= lr * gi / (std::sqrt(accum[i]) + eps);
    }
  }

  void step(EmbeddingSet& emb, GradBuffers& g, double lr, double eps) {
    apply(emb.entities.re, g.ent.re, ent.re, lr, eps);
    apply(emb.entities.im, g.ent.im, ent.im, lr, eps);
    apply(emb.relations.re, g.rel.re, rel.re, lr, eps);
    apply(emb.relations.im, g.rel.im, rel.im, lr, eps);
    apply(emb.timestamps.re, g.ts.re, ts.re, lr, eps);
    apply(emb.timestamps.im, g.ts.im, ts.im, lr, eps);
  }
};

void zero_row(ComplexTable& t, std::size_t row) {
  std::memset(t.row_re(row), 0, t.dim * sizeof(double));
  std::memset(t.row_im(row), 0, t.dim * sizeof(double));
}

constexpr std::size_t kChunk = 32;

}  // namespace

double dataset_loss(const EmbeddingSet& emb, const std::vector<Quad>& tuples,
                    const TrainConfig& cfg) {
  const std::size_t n_rows = emb.entities.rows;
  const auto& K = kernels::active();
  const double inv = 1.0 / static_cast<double>(tuples.size());
  double loss = 0.0;
  std::vector<double> scores(n_rows);
  for (const auto& q : tuples) {
    ComplexVec c = object_prediction_coeffs(emb, q, cfg.timeplex);
    K.score_rows_conj(c.re.data(), c.im.data(), emb.entities.re.data(), emb.entities.im.data(),
                      n_rows, emb.dim, scores.data());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 1; e < n_rows; ++e) mx = std::max(mx, scores[e]);
    double z = 0.0;
    for (std::size_t e = 1; e < n_rows; ++e) z += std::exp(scores[e] - mx);
    loss += (std::log(z) + mx - scores[q.o]) * inv;
    if (cfg.n3_weight > 0.0) {
      const auto tp = tuple_parts(emb.tag, q.rel_row, emb.n_relations);
      double reg = n3_value(emb.entities.row(q.s)) + n3_value(emb.entities.row(q.o));
      for (int i = 0; i < tp.n_rows; ++i) reg += n3_value(emb.relations.row(tp.rows[i]));
      if (tp.uses_time) reg += n3_value(emb.timestamps.row(q.t));
      loss += cfg.n3_weight * inv * reg;
    }
  }
  loss += smoothing_loss_grad(emb, emb.tag == ModelTag::kComplex ? 0.0 : cfg.temporal_smooth,
                              nullptr);
  return loss;
}

TupleSplit make_tuple_split(const TemporalKG& kg, ModelTag tag, const TrainConfig& cfg) {
  std::vector<Quad> tuples = build_training_tuples(kg, tag, cfg);
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
  rng.shuffle(tuples);
  const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                static_cast<double>(tuples.size()) * cfg.val_fraction));
  if (n_val >= tuples.size())
    throw std::invalid_argument("train_embeddings: validation split leaves no training data");
  TupleSplit split;
  split.val.assign(tuples.begin(), tuples.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(tuples.begin() + static_cast<std::ptrdiff_t>(n_val), tuples.end());
  return split;
}

DatasetGrads dataset_loss_grads(const EmbeddingSet& emb, const std::vector<Quad>& tuples,
                                const TrainConfig& cfg) {
  GradBuffers g;
  g.init(emb);
  g.clear();
  const double inv = 1.0 / static_cast<double>(tuples.size());
  std::vector<double> scores, dscore;
  for (const auto& q : tuples) tuple_loss_grad(emb, q, cfg, inv, g, scores, dscore);
  smoothing_loss_grad(emb, emb.tag == ModelTag::kComplex ? 0.0 : cfg.temporal_smooth, &g);
  DatasetGrads out;
  out.ent = std::move(g.ent);
  out.rel = std::move(g.rel);
  out.ts = std::move(g.ts);
  return out;
}

TrainResult train_embeddings(const TemporalKG& kg, ModelTag tag, const TrainConfig& cfg) {
  cfg.validate();
  if (kg.n_facts() == 0) throw std::invalid_argument("train_embeddings: empty KG");
  if (kg.n_entities() >= (1u << 20) || kg.n_years() >= (1u << 12) ||
      2 * kg.n_relations() >= (1u << 12))
    throw std::invalid_argument("train_embeddings: KG too large for tuple keys");

  const int threads = resolve_threads(cfg.threads);
  EmbeddingSet emb = init_embeddings(tag, kg.n_entities(), kg.n_relations(), kg.n_years(),
                                     cfg.dim, cfg.seed, cfg.init_scale);

  TupleSplit split = make_tuple_split(kg, tag, cfg);
  std::vector<Quad>& val = split.val;
  std::vector<Quad>& train = split.train;
  std::vector<Quad> all = train;
  all.insert(all.end(), val.begin(), val.end());
  const TupleFilter filter(all);

  const std::size_t max_chunks = num_chunks(cfg.batch_size, kChunk);
  std::vector<GradBuffers> bufs(max_chunks);
  for (auto& b : bufs) b.init(emb);
  Adagrad opt;
  opt.init(emb);

  TrainResult result;
  EmbeddingSet best = emb;
  double best_mrr = -1.0;
  int best_epoch = -1;
  int stale = 0;
  const double smooth_w = tag == ModelTag::kComplex ? 0.0 : cfg.temporal_smooth;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = rng.fork(static_cast<std::uint64_t>(epoch) + 0x100);
    erng.shuffle(train);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const std::size_t bsz = std::min(cfg.batch_size, train.size() - start);
      const double inv_batch = 1.0 / static_cast<double>(bsz);
      const std::size_t used = num_chunks(bsz, kChunk);
      for (std::size_t c = 0; c < used; ++c) bufs[c].clear();

      parallel_chunks(bsz, kChunk, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        GradBuffers& g = bufs[c];
        std::vector<double> scores, dscore;
        for (std::size_t i = lo; i < hi; ++i)
          g.loss += tuple_loss_grad(emb, train[start + i], cfg, inv_batch, g, scores, dscore);
      });
      for (std::size_t c = 1; c < used; ++c) bufs[0].add(bufs[c]);

      double batch_loss = bufs[0].loss;
      batch_loss += smoothing_loss_grad(emb, smooth_w, &bufs[0]);

      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train_embeddings: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));

      // DUMMY rows stay frozen during embedding training
      zero_row(bufs[0].ent, kDummyEntity);
      zero_row(bufs[0].ts, kDummyTime);
      opt.step(emb, bufs[0], cfg.lr, cfg.adagrad_eps);
      epoch_loss += batch_loss;
      ++n_batches;
    }

    const KgcMetrics vm = kgc_eval(emb, val, filter, threads, true, cfg.timeplex);
    result.log.push_back({epoch, epoch_loss / static_cast<double>(n_batches), vm.mrr});

    if (vm.mrr > best_mrr) {
      best_mrr = vm.mrr;
      best = emb;
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  result.emb = std::move(best);
  result.best_epoch = best_epoch;
  result.best_val_mrr = best_mrr;
  return result;
}

KgcMetrics kgc_eval(const EmbeddingSet& emb, const std::vector<Quad>& held_out,
                    const TupleFilter& filter, int threads, bool filtered,
                    const TimeplexWeights& tw) {
  const std::size_t n_rows = emb.entities.rows;
  const auto& K = kernels::active();
  const std::size_t n_chunks = num_chunks(held_out.size(), kChunk);
  std::vector<double> mrr_c(n_chunks, 0.0), h1_c(n_chunks, 0.0), h10_c(n_chunks, 0.0);

  parallel_chunks(held_out.size(), kChunk, resolve_threads(threads),
                  [&](std::size_t c, std::size_t lo, std::size_t hi) {
    std::vector<double> scores(n_rows);
    for (std::size_t i = lo; i < hi; ++i) {
      const Quad& q = held_out[i];
      ComplexVec coef = object_prediction_coeffs(emb, q, tw);
      K.score_rows_conj(coef.re.data(), coef.im.data(), emb.entities.re.data(),
                        emb.entities.im.data(), n_rows, emb.dim, scores.data());
      const double gold = scores[q.o];
      std::size_t rank = 1;
      for (std::size_t e = 1; e < n_rows; ++e) {
        if (e == q.o) continue;
        if (filtered && filter.contains(q.s, q.rel_row, static_cast<EntityId>(e), q.t)) continue;
        if (scores[e] > gold) ++rank;
      }
      mrr_c[c] += 1.0 / static_cast<double>(rank);
      if (rank <= 1) h1_c[c] += 1.0;
      if (rank <= 10) h10_c[c] += 1.0;
    }
  });

  KgcMetrics m;
  m.n_queries = held_out.size();
  for (std::size_t c = 0; c < n_chunks; ++c) {
    m.mrr += mrr_c[c];
    m.hits1 += h1_c[c];
    m.hits10 += h10_c[c];
  }
  if (m.n_queries > 0) {
    m.mrr /= static_cast<double>(m.n_queries);
    m.hits1 /= static_cast<double>(m.n_queries);
    m.hits10 /= static_cast<double>(m.n_queries);
  }
  return m;
}

}  // namespace tkgqa
