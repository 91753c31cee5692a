#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tkgqa {

struct Tensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }
  std::size_t size() const { return v.size(); }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 128;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t ffn_mult = 4;
  std::size_t max_len = 32;
  double ln_eps = 1e-5;

  void validate() const;
  std::size_t d_head() const { return d_model / n_heads; }
  std::size_t d_ffn() const { return ffn_mult * d_model; }
};

// Pre-norm transformer encoder over a token sequence whose position 0 is a
// dedicated pooling token; forward() returns the final hidden state at that
// position. Linear layers store W as [out x in] and compute y = x W^T.
struct EncoderParams {
  struct Layer {
    Tensor ln1_g, ln1_b;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln2_g, ln2_b;
    Tensor w1, b1, w2, b2;
  };
  Tensor tok_emb;  // V x d
  Tensor pos_emb;  // max_len x d
  std::vector<Layer> layers;
  Tensor lnf_g, lnf_b;

  static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed);
  static EncoderParams zeros_like(const EncoderParams& other);

  // stable iteration order for optimizers and serialization
  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_const(const std::function<void(const std::string&, const Tensor&)>& fn) const;
  std::size_t n_parameters() const;
};

// per-example activation tape, reusable across examples
struct EncoderTape {
  std::size_t S = 0;
  Tensor x0;                       // embedded input
  struct LayerTape {
    Tensor ln1_xhat, ln1_out;      // S x d
    std::vector<double> ln1_rstd;  // S
    Tensor q, k, v;                // S x d
    std::vector<Tensor> attn;      // per head S x S probabilities
    Tensor ctx;                    // S x d (heads concatenated)
    Tensor x_attn;                 // residual after attention
    Tensor ln2_xhat, ln2_out;
    std::vector<double> ln2_rstd;
    Tensor h1, g;                  // S x d_ffn
    Tensor x_out;                  // residual after ffn
  };
  std::vector<LayerTape> layers;
  Tensor xf_xhat;
  std::vector<double> xf_rstd;
  std::vector<double> pooled;      // d
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(EncoderConfig cfg, std::uint64_t seed);

  const EncoderConfig& config() const { return cfg_; }
  EncoderParams& params() { return params_; }
  const EncoderParams& params() const { return params_; }

  // tokens are vocabulary ids, tokens[0] is the pooling position;
  // sequences longer than max_len must be truncated by the caller
  void forward(const std::vector<int>& tokens, EncoderTape& tape) const;

  // d_pooled is the loss gradient at the pooled output; parameter gradients
  // are accumulated into `grads`
  void backward(const std::vector<int>& tokens, const EncoderTape& tape,
                const std::vector<double>& d_pooled, EncoderParams& grads) const;

 private:
  EncoderConfig cfg_;
  EncoderParams params_;
};

double gelu(double x);
double gelu_grad(double x);

}  // namespace tkgqa
