#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tkgqa/encoder.hpp"
#include "tkgqa/rng.hpp"

using namespace tkgqa;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.vocab_size = 11;
  cfg.d_model = 8;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.ffn_mult = 2;
  cfg.max_len = 6;
  return cfg;
}

// scalar objective: weighted sum of the pooled output
double pooled_objective(const Encoder& enc, const std::vector<int>& tokens,
                        const std::vector<double>& w) {
  EncoderTape tape;
  enc.forward(tokens, tape);
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * tape.pooled[i];
  return s;
}

}  // namespace

TEST_CASE("forward is deterministic and shape-correct") {
  Encoder enc(tiny_config(), 42);
  std::vector<int> tokens = {1, 5, 7, 2};
  EncoderTape t1, t2;
  enc.forward(tokens, t1);
  enc.forward(tokens, t2);
  CHECK(t1.pooled == t2.pooled);
  CHECK(t1.pooled.size() == tiny_config().d_model);

  CHECK_THROWS(enc.forward({}, t1));
  CHECK_THROWS(enc.forward({1, 2, 3, 4, 5, 6, 7}, t1));  // beyond max_len
  CHECK_THROWS(enc.forward({1, 99}, t1));                // token out of range
}

TEST_CASE("encoder gradients match central finite differences") {
  Encoder enc(tiny_config(), 7);
  const std::vector<int> tokens = {1, 3, 9, 4, 2};
  Rng rng(11);
  std::vector<double> w(tiny_config().d_model);
  for (double& x : w) x = rng.normal();

  EncoderTape tape;
  enc.forward(tokens, tape);
  EncoderParams grads = EncoderParams::zeros_like(enc.params());
  enc.backward(tokens, tape, w, grads);

  const double h = 1e-5;
  // sample a handful of coordinates from every tensor
  std::vector<std::pair<Tensor*, Tensor*>> pairs;
  std::vector<std::string> names;
  {
    std::vector<Tensor*> ps, gs;
    enc.params().for_each([&](const std::string& n, Tensor& t) {
      ps.push_back(&t);
      names.push_back(n);
    });
    grads.for_each([&](const std::string&, Tensor& t) { gs.push_back(&t); });
    for (std::size_t i = 0; i < ps.size(); ++i) pairs.emplace_back(ps[i], gs[i]);
  }

  std::size_t checked = 0;
  for (std::size_t ti = 0; ti < pairs.size(); ++ti) {
    auto [param, grad] = pairs[ti];
    const std::size_t n_probe = std::min<std::size_t>(4, param->size());
    for (std::size_t p = 0; p < n_probe; ++p) {
      const std::size_t idx = (p * 2654435761u) % param->size();
      const double saved = param->v[idx];
      param->v[idx] = saved + h;
      const double fp = pooled_objective(enc, tokens, w);
      param->v[idx] = saved - h;
      const double fm = pooled_objective(enc, tokens, w);
      param->v[idx] = saved;
      const double fd = (fp - fm) / (2 * h);
      const double an = grad->v[idx];
      const double err = std::abs(fd - an) / std::max({1e-8, std::abs(fd), std::abs(an)});
      INFO("tensor ", names[ti], " idx ", idx, " fd=", fd, " an=", an);
      CHECK(err < 1e-5);
      ++checked;
    }
  }
  CHECK(checked >= 30);

  // token embeddings of absent tokens receive no gradient
  bool all_zero = true;
  const std::size_t unused_token = 10;
  for (std::size_t j = 0; j < tiny_config().d_model; ++j)
    all_zero = all_zero && grads.tok_emb.row(unused_token)[j] == 0.0;
  CHECK(all_zero);
}

TEST_CASE("gelu derivative is consistent") {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    const double h = 1e-6;
    const double fd = (gelu(x + h) - gelu(x - h)) / (2 * h);
    CHECK(std::abs(fd - gelu_grad(x)) < 1e-8);
  }
}
