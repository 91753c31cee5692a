// QA training: cross entropy over the combined entity+timestamp answer
// space, backpropagated through the scoring heads into the projections and
// the encoder. KG embedding tables stay frozen except the DUMMY rows (and
// the timestamp table in embedkgqa mode, or everything when unfrozen).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "tkgqa/kernels.hpp"
#include "tkgqa/parallel.hpp"
#include "tkgqa/qa_model.hpp"
#include "tkgqa/rng.hpp"

namespace tkgqa {

namespace {

const kernels::Ops& K() { return kernels::active(); }

struct PreparedInstance {
  std::vector<int> tokens;
  AnchorSet anchors;
  std::vector<std::size_t> gold;
};

struct QaGrads {
  EncoderParams enc;
  Tensor w_ent, b_ent, w_time, b_time;
  ComplexTable ent_rows;  // same shape as the entity table
  ComplexTable ts_rows;   // same shape as the timestamp table
  double loss = 0.0;

  void init(const QAModel& m) {
    enc = EncoderParams::zeros_like(m.encoder.params());
    w_ent = Tensor(m.w_ent.rows, m.w_ent.cols);
    b_ent = Tensor(1, m.b_ent.cols);
    w_time = Tensor(m.w_time.rows, m.w_time.cols);
    b_time = Tensor(1, m.b_time.cols);
    ent_rows = ComplexTable(m.emb.entities.rows, m.emb.dim);
    ts_rows = ComplexTable(m.emb.timestamps.rows, m.emb.dim);
  }
  void clear() {
    enc.for_each([](const std::string&, Tensor& t) { t.zero(); });
    w_ent.zero();
    b_ent.zero();
    w_time.zero();
    b_time.zero();
    auto z = [](std::vector<double>& v) { std::memset(v.data(), 0, v.size() * sizeof(double)); };
    z(ent_rows.re);
    z(ent_rows.im);
    z(ts_rows.re);
    z(ts_rows.im);
    loss = 0.0;
  }
  void add(QaGrads& other) {
    auto acc = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    std::vector<Tensor*> mine, theirs;
    enc.for_each([&](const std::string&, Tensor& t) { mine.push_back(&t); });
    other.enc.for_each([&](const std::string&, Tensor& t) { theirs.push_back(&t); });
    for (std::size_t i = 0; i < mine.size(); ++i) acc(mine[i]->v, theirs[i]->v);
    acc(w_ent.v, other.w_ent.v);
    acc(b_ent.v, other.b_ent.v);
    acc(w_time.v, other.w_time.v);
    acc(b_time.v, other.b_time.v);
    acc(ent_rows.re, other.ent_rows.re);
    acc(ent_rows.im, other.ent_rows.im);
    acc(ts_rows.re, other.ts_rows.re);
    acc(ts_rows.im, other.ts_rows.im);
    loss += other.loss;
  }
};

// (re, -im) pattern into a gradient row: d Re(sum x * m)/dx
void add_conj_pattern(ComplexTable& table, std::size_t row, const ComplexVec& m, double w) {
  double* g_re = table.row_re(row);
  double* g_im = table.row_im(row);
  for (std::size_t d = 0; d < m.dim(); ++d) {
    g_re[d] += w * m.re[d];
    g_im[d] -= w * m.im[d];
  }
}

void add_plain_pattern(ComplexTable& table, std::size_t row, const ComplexVec& m, double w) {
  double* g_re = table.row_re(row);
  double* g_im = table.row_im(row);
  for (std::size_t d = 0; d < m.dim(); ++d) {
    g_re[d] += w * m.re[d];
    g_im[d] += w * m.im[d];
  }
}

double example_loss_grad(const QAModel& model, const PreparedInstance& pi,
                         double inv_batch, QaGrads& g, EncoderTape& tape) {
  const std::size_t D = model.emb.dim;
  const std::size_t E = model.n_entities();
  const std::size_t T = model.n_timestamps();

  model.encoder.forward(pi.tokens, tape);
  const std::vector<double>& pooled = tape.pooled;

  std::vector<double> qe_ent(2 * D), qe_time(2 * D);
  for (std::size_t i = 0; i < 2 * D; ++i) {
    qe_ent[i] = model.b_ent.data()[i] + K().dot(model.w_ent.row(i), pooled.data(), pooled.size());
    qe_time[i] =
        model.b_time.data()[i] + K().dot(model.w_time.row(i), pooled.data(), pooled.size());
  }

  const CxView u_s = model.emb.entities.row(pi.anchors.subject);
  const CxView u_o = model.emb.entities.row(pi.anchors.object);
  const CxView w_t = model.emb.timestamps.row(pi.anchors.time);

  std::vector<double> es = entity_scores(qe_ent, u_s, w_t, model.emb.entities);
  std::vector<double> ts = time_scores(qe_time, u_s, u_o, model.emb.timestamps);

  // softmax over the combined slots, dummy slots excluded
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= E; ++i) mx = std::max(mx, es[i]);
  for (std::size_t i = 1; i <= T; ++i) mx = std::max(mx, ts[i]);
  double z = 0.0;
  for (std::size_t i = 1; i <= E; ++i) z += std::exp(es[i] - mx);
  for (std::size_t i = 1; i <= T; ++i) z += std::exp(ts[i] - mx);
  const double logz = std::log(z) + mx;

  const double target_w = 1.0 / static_cast<double>(pi.gold.size());
  double loss = 0.0;
  for (std::size_t slot : pi.gold) {
    const double score = slot < E ? es[slot + 1] : ts[slot - E + 1];
    loss += target_w * (logz - score);
  }
  loss *= inv_batch;

  // dscore = p - y, laid out as per-table coefficient vectors
  std::vector<double> coef_ent(E + 1, 0.0), coef_time(T + 1, 0.0);
  const double inv_z = 1.0 / z;
  for (std::size_t i = 1; i <= E; ++i) coef_ent[i] = std::exp(es[i] - mx) * inv_z * inv_batch;
  for (std::size_t i = 1; i <= T; ++i) coef_time[i] = std::exp(ts[i] - mx) * inv_z * inv_batch;
  for (std::size_t slot : pi.gold) {
    if (slot < E)
      coef_ent[slot + 1] -= target_w * inv_batch;
    else
      coef_time[slot - E + 1] -= target_w * inv_batch;
  }

  const ComplexVec q_ent = interp_expanded(qe_ent);
  const ComplexVec q_time = interp_expanded(qe_time);

  // ---- entity head: score_e = Re(<u_s, q, conj(u_e), w_t>)
  ComplexVec S(D);
  K().weighted_rowsum(coef_ent.data(), model.emb.entities.re.data(),
                      model.emb.entities.im.data(), E + 1, D, S.re.data(), S.im.data());
  const ComplexVec m_ent = cmul(u_s, w_t);
  const ComplexVec X = cmul_conj(view(m_ent), view(S));  // dL/d qe_ent pattern

  std::vector<double> d_qe_ent(2 * D), d_qe_time(2 * D);
  for (std::size_t d = 0; d < D; ++d) {
    d_qe_ent[d] = X.re[d];
    d_qe_ent[D + d] = -X.im[d];
  }

  const bool ent_table_learn = model.unfreeze_tables;
  const bool subj_learn = ent_table_learn || pi.anchors.subject == kDummyEntity;
  const bool obj_learn = ent_table_learn || pi.anchors.object == kDummyEntity;
  const bool ts_table_learn = model.unfreeze_tables || model.mode == QaMode::kEmbedKgqa;
  const bool time_anchor_learn = ts_table_learn || pi.anchors.time == kDummyTime;

  if (subj_learn)
    add_conj_pattern(g.ent_rows, pi.anchors.subject, cmul_conj(view(cmul(view(q_ent), w_t)), view(S)),
                     1.0);
  if (time_anchor_learn)
    add_conj_pattern(g.ts_rows, pi.anchors.time, cmul_conj(view(cmul(u_s, view(q_ent))), view(S)),
                     1.0);
  if (ent_table_learn) {
    // candidate rows: grad_e += coef_e * c2, c2 = (u_s * q) * w_t
    ComplexVec c2 = cmul(view(cmul(u_s, view(q_ent))), w_t);
    K().rank1_update(coef_ent.data(), c2.re.data(), c2.im.data(), g.ent_rows.re.data(),
                     g.ent_rows.im.data(), E + 1, D);
  }

  // ---- time head: score_t = Re(<u_s, q', conj(u_o), w_t>)
  ComplexVec Wt(D);
  K().weighted_rowsum(coef_time.data(), model.emb.timestamps.re.data(),
                      model.emb.timestamps.im.data(), T + 1, D, Wt.re.data(), Wt.im.data());
  const ComplexVec so = cmul_conj(u_s, u_o);  // u_s * conj(u_o)
  const ComplexVec V = cmul(view(so), view(Wt));
  for (std::size_t d = 0; d < D; ++d) {
    d_qe_time[d] = V.re[d];
    d_qe_time[D + d] = -V.im[d];
  }
  if (subj_learn)
    add_conj_pattern(g.ent_rows, pi.anchors.subject,
                     cmul(view(cmul_conj(view(q_time), u_o)), view(Wt)), 1.0);
  if (obj_learn) {
    const ComplexVec m2 = cmul(u_s, view(q_time));
    add_plain_pattern(g.ent_rows, pi.anchors.object, cmul(view(m2), view(Wt)), 1.0);
  }
  if (ts_table_learn) {
    // candidate rows: conj pattern of m2 * conj(u_o)
    const ComplexVec m2 = cmul(u_s, view(q_time));
    ComplexVec K2 = cmul_conj(view(m2), u_o);
    for (std::size_t d = 0; d < D; ++d) K2.im[d] = -K2.im[d];
    K().rank1_update(coef_time.data(), K2.re.data(), K2.im.data(), g.ts_rows.re.data(),
                     g.ts_rows.im.data(), T + 1, D);
  }

  // ---- projections and encoder
  std::vector<double> d_pooled(pooled.size(), 0.0);
  for (std::size_t i = 0; i < 2 * D; ++i) {
    K().axpy(d_qe_ent[i], pooled.data(), g.w_ent.row(i), pooled.size());
    g.b_ent.data()[i] += d_qe_ent[i];
    K().axpy(d_qe_ent[i], model.w_ent.row(i), d_pooled.data(), pooled.size());
    K().axpy(d_qe_time[i], pooled.data(), g.w_time.row(i), pooled.size());
    g.b_time.data()[i] += d_qe_time[i];
    K().axpy(d_qe_time[i], model.w_time.row(i), d_pooled.data(), pooled.size());
  }
  model.encoder.backward(pi.tokens, tape, d_pooled, g.enc);
  return loss;
}

// Adam over a flat list of parameter/gradient spans
struct AdamOpt {
  struct Slot {
    double* p;
    const double* g;
    std::size_t n;
    std::size_t state_off;
  };
  std::vector<Slot> slots;
  std::vector<double> m, v;
  double beta1, beta2, eps;
  long step_count = 0;

  void add(double* p, const double* g, std::size_t n) {
    slots.push_back({p, g, n, m.size()});
    m.resize(m.size() + n, 0.0);
    v.resize(v.size() + n, 0.0);
  }

  void step(double lr) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, step_count);
    const double bc2 = 1.0 - std::pow(beta2, step_count);
    for (const auto& s : slots) {
      double* ms = m.data() + s.state_off;
      double* vs = v.data() + s.state_off;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double gi = s.g[i];
        ms[i] = beta1 * ms[i] + (1.0 - beta1) * gi;
        vs[i] = beta2 * vs[i] + (1.0 - beta2) * gi * gi;
        const double mhat = ms[i] / bc1;
        const double vhat = vs[i] / bc2;
        s.p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

struct ModelState {
  std::vector<std::vector<double>> tensors;
};

ModelState snapshot(QAModel& m) {
  ModelState s;
  m.encoder.params().for_each(
      [&](const std::string&, Tensor& t) { s.tensors.push_back(t.v); });
  s.tensors.push_back(m.w_ent.v);
  s.tensors.push_back(m.b_ent.v);
  s.tensors.push_back(m.w_time.v);
  s.tensors.push_back(m.b_time.v);
  s.tensors.push_back(m.emb.entities.re);
  s.tensors.push_back(m.emb.entities.im);
  s.tensors.push_back(m.emb.timestamps.re);
  s.tensors.push_back(m.emb.timestamps.im);
  return s;
}

void restore(QAModel& m, const ModelState& s) {
  std::size_t i = 0;
  m.encoder.params().for_each(
      [&](const std::string&, Tensor& t) { t.v = s.tensors[i++]; });
  m.w_ent.v = s.tensors[i++];
  m.b_ent.v = s.tensors[i++];
  m.w_time.v = s.tensors[i++];
  m.b_time.v = s.tensors[i++];
  m.emb.entities.re = s.tensors[i++];
  m.emb.entities.im = s.tensors[i++];
  m.emb.timestamps.re = s.tensors[i++];
  m.emb.timestamps.im = s.tensors[i++];
}

constexpr std::size_t kChunk = 32;

}  // namespace

void QaTrainConfig::validate() const {
  if (lr < 0 || batch_size == 0 || epochs <= 0 || patience <= 0)
    throw std::invalid_argument("QaTrainConfig: bad hyperparameters");
}

double qa_batch_loss(const QAModel& model, const std::vector<QAInstance>& batch,
                     const TemporalKG& kg, bool /*sample_one_gold*/) {
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& inst : batch) {
    QaForward f = qa_forward(model, inst, kg);
    const auto gold = gold_slots(model, inst, kg);
    const double tw = 1.0 / static_cast<double>(gold.size());
    for (std::size_t slot : gold) total -= inv * tw * std::log(std::max(f.probs[slot], 1e-300));
  }
  return total;
}

QaLossGrads qa_batch_loss_grads(const QAModel& model, const std::vector<QAInstance>& batch,
                                const TemporalKG& kg) {
  QaGrads g;
  g.init(model);
  g.clear();
  EncoderTape tape;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& inst : batch) {
    PreparedInstance pi;
    pi.tokens = tokenize_instance(inst, model.vocab, model.cfg.max_len);
    pi.anchors = extract_anchors(inst, kg);
    pi.gold = gold_slots(model, inst, kg);
    example_loss_grad(model, pi, inv, g, tape);
  }
  QaLossGrads out;
  out.enc = std::move(g.enc);
  out.w_ent = std::move(g.w_ent);
  out.b_ent = std::move(g.b_ent);
  out.w_time = std::move(g.w_time);
  out.b_time = std::move(g.b_time);
  out.ent_rows = std::move(g.ent_rows);
  out.ts_rows = std::move(g.ts_rows);
  return out;
}

QaTrainResult train_qa(QAModel& model, const std::vector<QAInstance>& train_fold,
                       const std::vector<QAInstance>& dev_fold, const TemporalKG& kg,
                       const QaTrainConfig& cfg) {
  cfg.validate();
  if (train_fold.empty()) throw std::invalid_argument("train_qa: empty training fold");
  const int threads = resolve_threads(cfg.threads);

  // cache tokens, anchors and gold slots
  std::vector<PreparedInstance> prepped(train_fold.size());
  for (std::size_t i = 0; i < train_fold.size(); ++i) {
    prepped[i].tokens = tokenize_instance(train_fold[i], model.vocab, model.cfg.max_len);
    prepped[i].anchors = extract_anchors(train_fold[i], kg);
    prepped[i].gold = gold_slots(model, train_fold[i], kg);
    if (prepped[i].gold.empty()) throw std::invalid_argument("train_qa: instance without gold");
  }
  std::vector<PreparedInstance> dev_prepped(dev_fold.size());
  for (std::size_t i = 0; i < dev_fold.size(); ++i) {
    dev_prepped[i].tokens = tokenize_instance(dev_fold[i], model.vocab, model.cfg.max_len);
    dev_prepped[i].anchors = extract_anchors(dev_fold[i], kg);
    dev_prepped[i].gold = gold_slots(model, dev_fold[i], kg);
  }

  const std::size_t max_chunks = num_chunks(cfg.batch_size, kChunk);
  std::vector<QaGrads> bufs(max_chunks);
  for (auto& b : bufs) b.init(model);

  AdamOpt opt;
  opt.beta1 = cfg.adam_beta1;
  opt.beta2 = cfg.adam_beta2;
  opt.eps = cfg.adam_eps;
  {
    // stable registration order; gradient spans point at chunk buffer 0
    std::vector<Tensor*> mp, gp;
    model.encoder.params().for_each([&](const std::string&, Tensor& t) { mp.push_back(&t); });
    bufs[0].enc.for_each([&](const std::string&, Tensor& t) { gp.push_back(&t); });
    for (std::size_t i = 0; i < mp.size(); ++i)
      opt.add(mp[i]->v.data(), gp[i]->v.data(), mp[i]->size());
    opt.add(model.w_ent.v.data(), bufs[0].w_ent.v.data(), model.w_ent.size());
    opt.add(model.b_ent.v.data(), bufs[0].b_ent.v.data(), model.b_ent.size());
    opt.add(model.w_time.v.data(), bufs[0].w_time.v.data(), model.w_time.size());
    opt.add(model.b_time.v.data(), bufs[0].b_time.v.data(), model.b_time.size());
    const std::size_t D = model.emb.dim;
    if (model.unfreeze_tables) {
      opt.add(model.emb.entities.re.data(), bufs[0].ent_rows.re.data(),
              model.emb.entities.re.size());
      opt.add(model.emb.entities.im.data(), bufs[0].ent_rows.im.data(),
              model.emb.entities.im.size());
    } else {
      opt.add(model.emb.entities.row_re(0), bufs[0].ent_rows.row_re(0), D);
      opt.add(model.emb.entities.row_im(0), bufs[0].ent_rows.row_im(0), D);
    }
    if (model.unfreeze_tables || model.mode == QaMode::kEmbedKgqa) {
      opt.add(model.emb.timestamps.re.data(), bufs[0].ts_rows.re.data(),
              model.emb.timestamps.re.size());
      opt.add(model.emb.timestamps.im.data(), bufs[0].ts_rows.im.data(),
              model.emb.timestamps.im.size());
    } else {
      opt.add(model.emb.timestamps.row_re(0), bufs[0].ts_rows.row_re(0), D);
      opt.add(model.emb.timestamps.row_im(0), bufs[0].ts_rows.row_im(0), D);
    }
  }

  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0xa1);
  std::vector<std::size_t> order(train_fold.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  QaTrainResult result;
  ModelState best = snapshot(model);
  double best_dev = -1.0;
  int best_epoch = -1;
  int stale = 0;

  std::vector<EncoderTape> tapes(max_chunks);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = rng.fork(static_cast<std::uint64_t>(epoch) + 7);
    erng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t bsz = std::min(cfg.batch_size, order.size() - start);
      const double inv_batch = 1.0 / static_cast<double>(bsz);
      const std::size_t used = num_chunks(bsz, kChunk);
      for (std::size_t c = 0; c < used; ++c) bufs[c].clear();

      parallel_chunks(bsz, kChunk, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
          bufs[c].loss +=
              example_loss_grad(model, prepped[order[start + i]], inv_batch, bufs[c], tapes[c]);
      });
      for (std::size_t c = 1; c < used; ++c) bufs[0].add(bufs[c]);
      if (!std::isfinite(bufs[0].loss))
        throw std::runtime_error("train_qa: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));
      opt.step(cfg.lr);
      epoch_loss += bufs[0].loss;
      ++n_batches;
    }

    // dev hits@10
    double dev_h10 = 0.0;
    if (!dev_fold.empty()) {
      const std::size_t n_chunks_dev = num_chunks(dev_prepped.size(), kChunk);
      std::vector<double> hits(n_chunks_dev, 0.0);
      parallel_chunks(dev_prepped.size(), kChunk, threads,
                      [&](std::size_t c, std::size_t lo, std::size_t hi) {
        EncoderTape tape;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& pi = dev_prepped[i];
          model.encoder.forward(pi.tokens, tape);
          std::vector<double> qe_ent(2 * model.emb.dim), qe_time(2 * model.emb.dim);
          for (std::size_t j = 0; j < qe_ent.size(); ++j) {
            qe_ent[j] = model.b_ent.data()[j] +
                        K().dot(model.w_ent.row(j), tape.pooled.data(), tape.pooled.size());
            qe_time[j] = model.b_time.data()[j] +
                         K().dot(model.w_time.row(j), tape.pooled.data(), tape.pooled.size());
          }
          const auto es = entity_scores(qe_ent, model.emb.entities.row(pi.anchors.subject),
                                        model.emb.timestamps.row(pi.anchors.time),
                                        model.emb.entities);
          const auto ts = time_scores(qe_time, model.emb.entities.row(pi.anchors.subject),
                                      model.emb.entities.row(pi.anchors.object),
                                      model.emb.timestamps);
          const auto probs = answer_distribution(es, ts);
          // top-10 membership without materializing the full sort
          std::vector<std::size_t> idx(probs.size());
          for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
          const std::size_t k = std::min<std::size_t>(10, idx.size());
          std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                            [&](std::size_t a, std::size_t b) {
                              if (probs[a] != probs[b]) return probs[a] > probs[b];
                              return a < b;
                            });
          bool hit = false;
          for (std::size_t j = 0; j < k && !hit; ++j)
            hit = std::find(pi.gold.begin(), pi.gold.end(), idx[j]) != pi.gold.end();
          if (hit) hits[c] += 1.0;
        }
      });
      for (double h : hits) dev_h10 += h;
      dev_h10 /= static_cast<double>(dev_prepped.size());
    }

    result.log.push_back({epoch, epoch_loss / static_cast<double>(n_batches), dev_h10});

    if (dev_h10 > best_dev) {
      best_dev = dev_h10;
      best = snapshot(model);
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  restore(model, best);
  result.best_epoch = best_epoch;
  result.best_dev_hits10 = best_dev;
  return result;
}

}  // namespace tkgqa
