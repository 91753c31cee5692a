#include "tkgqa/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "tkgqa/kernels.hpp"
#include "tkgqa/rng.hpp"

namespace tkgqa {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

const kernels::Ops& K() { return kernels::active(); }

// y = x W^T + b for row-major x (S x in), W (out x in)
void linear(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
  y.zero();
  K().gemm_nt(x.data(), x.cols, w.data(), w.cols, y.data(), y.cols, x.rows, x.cols, w.rows);
  for (std::size_t s = 0; s < y.rows; ++s)
    for (std::size_t j = 0; j < y.cols; ++j) y.row(s)[j] += b.data()[j];
}

// dX += dY W ; dW += dY^T X ; db += column sums of dY
void linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dx,
                     Tensor& dw, Tensor& db) {
  K().gemm_nn(dy.data(), dy.cols, w.data(), w.cols, dx.data(), dx.cols, dy.rows, dy.cols,
              w.cols);
  K().gemm_tn(dy.data(), dy.cols, x.data(), x.cols, dw.data(), dw.cols, dy.cols, dy.rows,
              x.cols);
  for (std::size_t s = 0; s < dy.rows; ++s)
    for (std::size_t j = 0; j < dy.cols; ++j) db.data()[j] += dy.row(s)[j];
}

void layer_norm(const Tensor& x, const Tensor& g, const Tensor& b, double eps, Tensor& xhat,
                std::vector<double>& rstd, Tensor& y) {
  const std::size_t d = x.cols;
  rstd.resize(x.rows);
  for (std::size_t s = 0; s < x.rows; ++s) {
    const double* xr = x.row(s);
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + eps);
    rstd[s] = r;
    double* xh = xhat.row(s);
    double* yr = y.row(s);
    for (std::size_t j = 0; j < d; ++j) {
      xh[j] = (xr[j] - mean) * r;
      yr[j] = g.data()[j] * xh[j] + b.data()[j];
    }
  }
}

void layer_norm_backward(const Tensor& xhat, const std::vector<double>& rstd, const Tensor& g,
                         const Tensor& dy, Tensor& dx, Tensor& dg, Tensor& db) {
  const std::size_t d = xhat.cols;
  for (std::size_t s = 0; s < xhat.rows; ++s) {
    const double* xh = xhat.row(s);
    const double* dyr = dy.row(s);
    double* dxr = dx.row(s);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = dyr[j] * g.data()[j];
      m1 += t;
      m2 += t * xh[j];
      dg.data()[j] += dyr[j] * xh[j];
      db.data()[j] += dyr[j];
    }
    m1 /= static_cast<double>(d);
    m2 /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j)
      dxr[j] += rstd[s] * (dyr[j] * g.data()[j] - m1 - xh[j] * m2);
  }
}

void softmax_rows(Tensor& t) {
  for (std::size_t r = 0; r < t.rows; ++r) {
    double* x = t.row(r);
    double mx = x[0];
    for (std::size_t j = 1; j < t.cols; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < t.cols; ++j) {
      x[j] = std::exp(x[j] - mx);
      z += x[j];
    }
    for (std::size_t j = 0; j < t.cols; ++j) x[j] /= z;
  }
}

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

void EncoderConfig::validate() const {
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || max_len < 2 || vocab_size == 0)
    throw std::invalid_argument("EncoderConfig: zero-sized field");
  if (d_model % n_heads != 0)
    throw std::invalid_argument("EncoderConfig: d_model must be divisible by n_heads");
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed ^ 0xe4c0de5ULL);
  EncoderParams p;
  auto gauss = [&rng](Tensor& t, double scale) {
    for (double& x : t.v) x = scale * rng.normal();
  };
  auto ones = [](Tensor& t) { std::fill(t.v.begin(), t.v.end(), 1.0); };

  const std::size_t d = cfg.d_model, f = cfg.d_ffn();
  p.tok_emb = Tensor(cfg.vocab_size, d);
  p.pos_emb = Tensor(cfg.max_len, d);
  gauss(p.tok_emb, 0.02);
  gauss(p.pos_emb, 0.02);
  p.layers.resize(cfg.n_layers);
  for (auto& L : p.layers) {
    L.ln1_g = Tensor(1, d);
    L.ln1_b = Tensor(1, d);
    ones(L.ln1_g);
    L.wq = Tensor(d, d);
    L.wk = Tensor(d, d);
    L.wv = Tensor(d, d);
    L.wo = Tensor(d, d);
    gauss(L.wq, 0.02);
    gauss(L.wk, 0.02);
    gauss(L.wv, 0.02);
    gauss(L.wo, 0.02);
    L.bq = Tensor(1, d);
    L.bk = Tensor(1, d);
    L.bv = Tensor(1, d);
    L.bo = Tensor(1, d);
    L.ln2_g = Tensor(1, d);
    L.ln2_b = Tensor(1, d);
    ones(L.ln2_g);
    L.w1 = Tensor(f, d);
    L.b1 = Tensor(1, f);
    L.w2 = Tensor(d, f);
    L.b2 = Tensor(1, d);
    gauss(L.w1, 0.02);
    gauss(L.w2, 0.02);
  }
  p.lnf_g = Tensor(1, d);
  p.lnf_b = Tensor(1, d);
  ones(p.lnf_g);
  return p;
}

EncoderParams EncoderParams::zeros_like(const EncoderParams& other) {
  EncoderParams p = other;
  p.for_each([](const std::string&, Tensor& t) { t.zero(); });
  return p;
}

void EncoderParams::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("tok_emb", tok_emb);
  fn("pos_emb", pos_emb);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& L = layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    fn(pre + "ln1_g", L.ln1_g);
    fn(pre + "ln1_b", L.ln1_b);
    fn(pre + "wq", L.wq);
    fn(pre + "bq", L.bq);
    fn(pre + "wk", L.wk);
    fn(pre + "bk", L.bk);
    fn(pre + "wv", L.wv);
    fn(pre + "bv", L.bv);
    fn(pre + "wo", L.wo);
    fn(pre + "bo", L.bo);
    fn(pre + "ln2_g", L.ln2_g);
    fn(pre + "ln2_b", L.ln2_b);
    fn(pre + "w1", L.w1);
    fn(pre + "b1", L.b1);
    fn(pre + "w2", L.w2);
    fn(pre + "b2", L.b2);
  }
  fn("lnf_g", lnf_g);
  fn("lnf_b", lnf_b);
}

void EncoderParams::for_each_const(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<EncoderParams*>(this)->for_each(
      [&fn](const std::string& n, Tensor& t) { fn(n, t); });
}

std::size_t EncoderParams::n_parameters() const {
  std::size_t n = 0;
  for_each_const([&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

Encoder::Encoder(EncoderConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(EncoderParams::init(cfg, seed)) {}

void Encoder::forward(const std::vector<int>& tokens, EncoderTape& tape) const {
  const std::size_t S = tokens.size();
  if (S == 0 || S > cfg_.max_len)
    throw std::invalid_argument("Encoder::forward: bad sequence length");
  const std::size_t d = cfg_.d_model, H = cfg_.n_heads, dh = cfg_.d_head(), f = cfg_.d_ffn();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  tape.S = S;
  tape.x0 = Tensor(S, d);
  for (std::size_t s = 0; s < S; ++s) {
    const int tok = tokens[s];
    if (tok < 0 || static_cast<std::size_t>(tok) >= cfg_.vocab_size)
      throw std::invalid_argument("Encoder::forward: token id out of range");
    const double* te = params_.tok_emb.row(static_cast<std::size_t>(tok));
    const double* pe = params_.pos_emb.row(s);
    double* x = tape.x0.row(s);
    for (std::size_t j = 0; j < d; ++j) x[j] = te[j] + pe[j];
  }

  tape.layers.resize(cfg_.n_layers);
  Tensor x = tape.x0;
  for (std::size_t li = 0; li < cfg_.n_layers; ++li) {
    const auto& L = params_.layers[li];
    auto& T = tape.layers[li];

    T.ln1_xhat = Tensor(S, d);
    T.ln1_out = Tensor(S, d);
    layer_norm(x, L.ln1_g, L.ln1_b, cfg_.ln_eps, T.ln1_xhat, T.ln1_rstd, T.ln1_out);

    T.q = Tensor(S, d);
    T.k = Tensor(S, d);
    T.v = Tensor(S, d);
    linear(T.ln1_out, L.wq, L.bq, T.q);
    linear(T.ln1_out, L.wk, L.bk, T.k);
    linear(T.ln1_out, L.wv, L.bv, T.v);

    T.attn.assign(H, Tensor(S, S));
    T.ctx = Tensor(S, d);
    for (std::size_t h = 0; h < H; ++h) {
      Tensor& P = T.attn[h];
      P.zero();
      K().gemm_nt(T.q.data() + h * dh, d, T.k.data() + h * dh, d, P.data(), S, S, dh, S);
      for (double& sv : P.v) sv *= scale;
      softmax_rows(P);
      K().gemm_nn(P.data(), S, T.v.data() + h * dh, d, T.ctx.data() + h * dh, d, S, S, dh);
    }

    Tensor attn_out(S, d);
    linear(T.ctx, L.wo, L.bo, attn_out);
    T.x_attn = Tensor(S, d);
    for (std::size_t i = 0; i < x.size(); ++i) T.x_attn.v[i] = x.v[i] + attn_out.v[i];

    T.ln2_xhat = Tensor(S, d);
    T.ln2_out = Tensor(S, d);
    layer_norm(T.x_attn, L.ln2_g, L.ln2_b, cfg_.ln_eps, T.ln2_xhat, T.ln2_rstd, T.ln2_out);

    T.h1 = Tensor(S, f);
    linear(T.ln2_out, L.w1, L.b1, T.h1);
    T.g = Tensor(S, f);
    for (std::size_t i = 0; i < T.h1.size(); ++i) T.g.v[i] = gelu(T.h1.v[i]);
    Tensor ffn_out(S, d);
    linear(T.g, L.w2, L.b2, ffn_out);

    T.x_out = Tensor(S, d);
    for (std::size_t i = 0; i < x.size(); ++i) T.x_out.v[i] = T.x_attn.v[i] + ffn_out.v[i];
    x = T.x_out;
  }

  tape.xf_xhat = Tensor(S, d);
  Tensor xf(S, d);
  layer_norm(x, params_.lnf_g, params_.lnf_b, cfg_.ln_eps, tape.xf_xhat, tape.xf_rstd, xf);
  tape.pooled.assign(xf.row(0), xf.row(0) + d);
}

void Encoder::backward(const std::vector<int>& tokens, const EncoderTape& tape,
                       const std::vector<double>& d_pooled, EncoderParams& grads) const {
  const std::size_t S = tape.S, d = cfg_.d_model, H = cfg_.n_heads, dh = cfg_.d_head(),
                    f = cfg_.d_ffn();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // final layer norm: loss only touches row 0 of the output
  Tensor d_xf(S, d);
  for (std::size_t j = 0; j < d; ++j) d_xf.row(0)[j] = d_pooled[j];
  Tensor dx(S, d);
  layer_norm_backward(tape.xf_xhat, tape.xf_rstd, params_.lnf_g, d_xf, dx, grads.lnf_g,
                      grads.lnf_b);

  for (std::size_t li = cfg_.n_layers; li-- > 0;) {
    const auto& L = params_.layers[li];
    const auto& T = tape.layers[li];
    auto& G = grads.layers[li];

    // ffn block: x_out = x_attn + W2 gelu(W1 ln2(x_attn) + b1) + b2
    Tensor d_g(S, f);
    Tensor d_ffn_in(S, d);
    linear_backward(T.g, L.w2, dx, d_g, G.w2, G.b2);
    Tensor d_h1(S, f);
    for (std::size_t i = 0; i < d_h1.size(); ++i) d_h1.v[i] = d_g.v[i] * gelu_grad(T.h1.v[i]);
    linear_backward(T.ln2_out, L.w1, d_h1, d_ffn_in, G.w1, G.b1);
    Tensor d_x_attn(S, d);
    layer_norm_backward(T.ln2_xhat, T.ln2_rstd, L.ln2_g, d_ffn_in, d_x_attn, G.ln2_g, G.ln2_b);
    for (std::size_t i = 0; i < dx.size(); ++i) d_x_attn.v[i] += dx.v[i];  // residual

    // attention block
    Tensor d_ctx(S, d);
    Tensor d_attn_res(S, d);
    linear_backward(T.ctx, L.wo, d_x_attn, d_ctx, G.wo, G.bo);
    Tensor d_q(S, d), d_k(S, d), d_v(S, d);
    for (std::size_t h = 0; h < H; ++h) {
      const Tensor& P = T.attn[h];
      // dP = d_ctx_h V_h^T ; dV_h = P^T d_ctx_h
      Tensor dP(S, S);
      K().gemm_nt(d_ctx.data() + h * dh, d, T.v.data() + h * dh, d, dP.data(), S, S, dh, S);
      K().gemm_tn(P.data(), S, d_ctx.data() + h * dh, d, d_v.data() + h * dh, d, S, S, dh);
      // softmax backward rows
      for (std::size_t r = 0; r < S; ++r) {
        const double* p = P.row(r);
        double* dp = dP.row(r);
        double dot = 0.0;
        for (std::size_t c2 = 0; c2 < S; ++c2) dot += dp[c2] * p[c2];
        for (std::size_t c2 = 0; c2 < S; ++c2) dp[c2] = p[c2] * (dp[c2] - dot) * scale;
      }
      // dQ_h = dS K_h ; dK_h = dS^T Q_h
      K().gemm_nn(dP.data(), S, T.k.data() + h * dh, d, d_q.data() + h * dh, d, S, S, dh);
      K().gemm_tn(dP.data(), S, T.q.data() + h * dh, d, d_k.data() + h * dh, d, S, S, dh);
    }
    linear_backward(T.ln1_out, L.wq, d_q, d_attn_res, G.wq, G.bq);
    linear_backward(T.ln1_out, L.wk, d_k, d_attn_res, G.wk, G.bk);
    linear_backward(T.ln1_out, L.wv, d_v, d_attn_res, G.wv, G.bv);

    Tensor d_x_in(S, d);
    layer_norm_backward(T.ln1_xhat, T.ln1_rstd, L.ln1_g, d_attn_res, d_x_in, G.ln1_g, G.ln1_b);
    for (std::size_t i = 0; i < d_x_in.size(); ++i) d_x_in.v[i] += d_x_attn.v[i];  // residual
    dx = std::move(d_x_in);
  }

  for (std::size_t s = 0; s < S; ++s) {
    const double* dr = dx.row(s);
    double* te = grads.tok_emb.row(static_cast<std::size_t>(tokens[s]));
    double* pe = grads.pos_emb.row(s);
    for (std::size_t j = 0; j < d; ++j) {
      te[j] += dr[j];
      pe[j] += dr[j];
    }
  }
}

}  // namespace tkgqa
