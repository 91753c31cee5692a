#include "tkgqa/qa_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tkgqa/complex_ops.hpp"
#include "tkgqa/kernels.hpp"
#include "tkgqa/rng.hpp"

namespace tkgqa {

std::string qa_mode_name(QaMode m) {
  return m == QaMode::kCronKgqa ? "cronkgqa" : "embedkgqa";
}

QaMode qa_mode_from_name(const std::string& s) {
  if (s == "cronkgqa") return QaMode::kCronKgqa;
  if (s == "embedkgqa") return QaMode::kEmbedKgqa;
  throw std::invalid_argument("unknown qa mode: " + s);
}

AnchorSet extract_anchors(const QAInstance& inst, const TemporalKG& kg) {
  AnchorSet a;
  if (!inst.entities.empty()) a.subject = inst.entities[0].id;
  if (inst.entities.size() > 1) a.object = inst.entities[1].id;
  if (!inst.times.empty()) {
    const int y = inst.times[0].year;
    if (y >= kg.y_min() && y <= kg.y_max()) a.time = kg.timestamp_of_year(y);
  }
  return a;
}

// ------------------------------------------------------------------ vocab

namespace {

std::vector<std::string> word_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const bool word = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    if (word) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// token strings of one instance with mention markers, without <cls>
std::vector<std::string> instance_token_strings(const QAInstance& inst) {
  struct Span {
    std::size_t begin, end;
    bool is_time;
    std::size_t idx;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < inst.entities.size(); ++i)
    spans.push_back({inst.entities[i].begin, inst.entities[i].end, false, i});
  for (std::size_t i = 0; i < inst.times.size(); ++i)
    spans.push_back({inst.times[i].begin, inst.times[i].end, true, i});
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });

  std::vector<std::string> toks;
  std::size_t pos = 0;
  for (const auto& sp : spans) {
    for (const auto& w : word_tokens(inst.question.substr(pos, sp.begin - pos)))
      toks.push_back(w);
    toks.push_back(sp.is_time ? "<time>" : "<ent>");
    const std::string mention = inst.question.substr(sp.begin, sp.end - sp.begin);
    for (const auto& w : word_tokens(mention)) toks.push_back(w);
    pos = sp.end;
  }
  for (const auto& w : word_tokens(inst.question.substr(pos))) toks.push_back(w);
  return toks;
}

}  // namespace

Vocab Vocab::from_tokens(std::vector<std::string> toks) {
  Vocab v;
  v.tokens = std::move(toks);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.ids[v.tokens[i]] = static_cast<int>(i);
  return v;
}

Vocab Vocab::build(const std::vector<QAInstance>& train_instances) {
  std::vector<std::string> toks = {"<pad>", "<cls>", "<unk>", "<ent>", "<time>"};
  std::unordered_map<std::string, bool> seen;
  for (const auto& t : toks) seen[t] = true;
  for (const auto& inst : train_instances) {
    for (const auto& tok : instance_token_strings(inst)) {
      if (!seen.count(tok)) {
        seen[tok] = true;
        toks.push_back(tok);
      }
    }
  }
  return from_tokens(std::move(toks));
}

std::string Vocab::fnv_hash_hex() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::vector<int> tokenize_instance(const QAInstance& inst, const Vocab& vocab,
                                   std::size_t max_len) {
  std::vector<int> out{Vocab::kCls};
  for (const auto& tok : instance_token_strings(inst)) {
    if (out.size() >= max_len) break;
    out.push_back(vocab.id(tok));
  }
  return out;
}

// ------------------------------------------------------------------ model

QAModel build_qa_model(const EmbeddingSet& emb, QaMode mode, const QaModelConfig& cfg,
                       const std::vector<QAInstance>& train_fold) {
  if (mode == QaMode::kCronKgqa && emb.tag != ModelTag::kTComplex)
    throw std::invalid_argument("cronkgqa mode requires a tcomplex checkpoint, got " +
                                model_tag_name(emb.tag));
  if (mode == QaMode::kEmbedKgqa && emb.tag != ModelTag::kComplex)
    throw std::invalid_argument("embedkgqa mode requires a complex checkpoint, got " +
                                model_tag_name(emb.tag));

  QAModel m;
  m.mode = mode;
  m.emb = emb;
  m.cfg = cfg;
  m.vocab = Vocab::build(train_fold);

  EncoderConfig ec;
  ec.vocab_size = m.vocab.size();
  ec.d_model = cfg.d_model;
  ec.n_layers = cfg.n_layers;
  ec.n_heads = cfg.n_heads;
  ec.ffn_mult = cfg.ffn_mult;
  ec.max_len = cfg.max_len;
  m.encoder = Encoder(ec, cfg.seed);

  Rng rng(cfg.seed ^ 0x9a11ULL);
  const std::size_t twoD = 2 * m.emb.dim;
  m.w_ent = Tensor(twoD, cfg.d_model);
  m.w_time = Tensor(twoD, cfg.d_model);
  m.b_ent = Tensor(1, twoD);
  m.b_time = Tensor(1, twoD);
  for (double& x : m.w_ent.v) x = 0.02 * rng.normal();
  for (double& x : m.w_time.v) x = 0.02 * rng.normal();
  return m;
}

namespace {

void project(const Tensor& w, const Tensor& b, const std::vector<double>& h,
             std::vector<double>& out) {
  out.assign(w.rows, 0.0);
  const auto& K = kernels::active();
  for (std::size_t i = 0; i < w.rows; ++i) out[i] = b.data()[i] + K.dot(w.row(i), h.data(), w.cols);
}

}  // namespace

QaForward qa_forward(const QAModel& model, const QAInstance& inst, const TemporalKG& kg) {
  QaForward f;
  f.anchors = extract_anchors(inst, kg);
  f.tokens = tokenize_instance(inst, model.vocab, model.cfg.max_len);

  EncoderTape tape;
  model.encoder.forward(f.tokens, tape);
  project(model.w_ent, model.b_ent, tape.pooled, f.qe_ent);
  project(model.w_time, model.b_time, tape.pooled, f.qe_time);

  const CxView u_s = model.emb.entities.row(f.anchors.subject);
  const CxView u_o = model.emb.entities.row(f.anchors.object);
  const CxView w_t = model.emb.timestamps.row(f.anchors.time);
  const std::vector<double> es = entity_scores(f.qe_ent, u_s, w_t, model.emb.entities);
  const std::vector<double> ts = time_scores(f.qe_time, u_s, u_o, model.emb.timestamps);
  f.probs = answer_distribution(es, ts);
  return f;
}

std::vector<std::size_t> gold_slots(const QAModel& model, const QAInstance& inst,
                                    const TemporalKG& kg) {
  std::vector<std::size_t> slots;
  const std::size_t E = model.n_entities();
  if (inst.answer_kind == AnswerKind::kEntity) {
    for (EntityId e : inst.answers.entities) {
      if (e == kDummyEntity || e > E)
        throw std::out_of_range("gold entity id outside the embedding table");
      slots.push_back(e - 1);
    }
  } else {
    for (int y : inst.answers.years) {
      const TimestampId t = kg.timestamp_of_year(y);
      slots.push_back(E + t - 1);
    }
  }
  return slots;
}

std::vector<RankedAnswer> predict_topk(const QAModel& model, const QAInstance& inst,
                                       const TemporalKG& kg, std::size_t k) {
  if (k == 0 || k > model.n_answer_slots())
    throw std::invalid_argument("predict_topk: k out of range");
  QaForward f = qa_forward(model, inst, kg);
  std::vector<std::size_t> order(f.probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (f.probs[a] != f.probs[b]) return f.probs[a] > f.probs[b];
                      return a < b;
                    });
  const std::size_t E = model.n_entities();
  std::vector<RankedAnswer> out;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t slot = order[i];
    RankedAnswer r;
    r.prob = f.probs[slot];
    if (slot < E) {
      r.is_entity = true;
      r.label = kg.entity_label(static_cast<EntityId>(slot + 1));
    } else {
      r.is_entity = false;
      r.label = std::to_string(kg.year_of_timestamp(static_cast<TimestampId>(slot - E + 1)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------- io

namespace {

void write_u16(std::ostream& out, std::uint16_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u32s(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  write_u16(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32s(out, static_cast<std::uint32_t>(t.rows));
  write_u32s(out, static_cast<std::uint32_t>(t.cols));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

std::pair<std::string, Tensor> read_tensor(std::istream& in, const std::string& path) {
  std::uint16_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len)))
    throw std::runtime_error(path + ": truncated tensor section");
  std::string name(len, '\0');
  in.read(name.data(), len);
  std::uint32_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Tensor t(rows, cols);
  if (!in.read(reinterpret_cast<char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double))))
    throw std::runtime_error(path + ": truncated tensor payload for " + name);
  return {name, std::move(t)};
}

}  // namespace

void save_qa_model(const QAModel& model, const TemporalKG& kg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  write_embedding_core(out, model.emb);

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  const_cast<QAModel&>(model).encoder.params().for_each(
      [&](const std::string& n, Tensor& t) { tensors.emplace_back("encoder." + n, &t); });
  tensors.emplace_back("proj.w_ent", &model.w_ent);
  tensors.emplace_back("proj.b_ent", &model.b_ent);
  tensors.emplace_back("proj.w_time", &model.w_time);
  tensors.emplace_back("proj.b_time", &model.b_time);

  write_u32s(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) write_tensor(out, name, *t);

  nlohmann::ordered_json meta;
  meta["mode"] = qa_mode_name(model.mode);
  meta["config"] = {{"d_model", model.cfg.d_model},   {"n_layers", model.cfg.n_layers},
                    {"n_heads", model.cfg.n_heads},   {"ffn_mult", model.cfg.ffn_mult},
                    {"max_len", model.cfg.max_len},   {"seed", model.cfg.seed}};
  meta["unfreeze_tables"] = model.unfreeze_tables;
  meta["vocab_hash"] = model.vocab.fnv_hash_hex();
  meta["vocab"] = model.vocab.tokens;
  meta["kg"] = {{"y_min", kg.y_min()}, {"y_max", kg.y_max()}};
  const std::string meta_str = meta.dump();
  write_u64(out, meta_str.size());
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  if (!out) throw std::runtime_error("model write failed: " + path);
}

QAModel load_qa_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  QAModel m;
  m.emb = read_embedding_core(in, path);

  std::uint32_t n_tensors = 0;
  if (!in.read(reinterpret_cast<char*>(&n_tensors), sizeof(n_tensors)))
    throw std::runtime_error(path + ": truncated tensor count");
  std::unordered_map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto [name, t] = read_tensor(in, path);
    tensors.emplace(std::move(name), std::move(t));
  }
  std::uint64_t meta_len = 0;
  if (!in.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len)))
    throw std::runtime_error(path + ": truncated metadata length");
  std::string meta_str(meta_len, '\0');
  if (!in.read(meta_str.data(), static_cast<std::streamsize>(meta_len)))
    throw std::runtime_error(path + ": truncated metadata block");
  nlohmann::json meta = nlohmann::json::parse(meta_str);

  m.mode = qa_mode_from_name(meta.at("mode").get<std::string>());
  m.unfreeze_tables = meta.value("unfreeze_tables", false);
  m.cfg.d_model = meta["config"]["d_model"].get<std::size_t>();
  m.cfg.n_layers = meta["config"]["n_layers"].get<std::size_t>();
  m.cfg.n_heads = meta["config"]["n_heads"].get<std::size_t>();
  m.cfg.ffn_mult = meta["config"]["ffn_mult"].get<std::size_t>();
  m.cfg.max_len = meta["config"]["max_len"].get<std::size_t>();
  m.cfg.seed = meta["config"]["seed"].get<std::uint64_t>();
  m.vocab = Vocab::from_tokens(meta.at("vocab").get<std::vector<std::string>>());
  if (meta.at("vocab_hash").get<std::string>() != m.vocab.fnv_hash_hex())
    throw std::runtime_error(path + ": vocabulary hash mismatch");

  EncoderConfig ec;
  ec.vocab_size = m.vocab.size();
  ec.d_model = m.cfg.d_model;
  ec.n_layers = m.cfg.n_layers;
  ec.n_heads = m.cfg.n_heads;
  ec.ffn_mult = m.cfg.ffn_mult;
  ec.max_len = m.cfg.max_len;
  m.encoder = Encoder(ec, m.cfg.seed);
  m.encoder.params().for_each([&](const std::string& n, Tensor& t) {
    auto it = tensors.find("encoder." + n);
    if (it == tensors.end()) throw std::runtime_error(path + ": missing tensor encoder." + n);
    if (it->second.rows != t.rows || it->second.cols != t.cols)
      throw std::runtime_error(path + ": tensor shape mismatch for encoder." + n);
    t = std::move(it->second);
  });
  auto take = [&](const char* name, Tensor& dst) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::runtime_error(path + ": missing tensor " + name);
    dst = std::move(it->second);
  };
  take("proj.w_ent", m.w_ent);
  take("proj.b_ent", m.b_ent);
  take("proj.w_time", m.w_time);
  take("proj.b_time", m.b_time);
  return m;
}

}  // namespace tkgqa
