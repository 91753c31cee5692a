#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "tkgqa/complex_ops.hpp"
#include "tkgqa/rng.hpp"

using namespace tkgqa;

namespace {

// naive per-term oracle over std::complex, ascending d
using cd = std::complex<double>;

std::vector<cd> to_std(const ComplexVec& v) {
  std::vector<cd> out(v.dim());
  for (std::size_t d = 0; d < v.dim(); ++d) out[d] = {v.re[d], v.im[d]};
  return out;
}

double oracle_complex(const ComplexVec& s, const ComplexVec& r, const ComplexVec& o) {
  auto S = to_std(s), R = to_std(r), O = to_std(o);
  cd acc = 0;
  for (std::size_t d = 0; d < S.size(); ++d) acc += S[d] * R[d] * std::conj(O[d]);
  return acc.real();
}

double oracle_tcomplex(const ComplexVec& s, const ComplexVec& r, const ComplexVec& o,
                       const ComplexVec& t) {
  auto S = to_std(s), R = to_std(r), O = to_std(o), T = to_std(t);
  cd acc = 0;
  for (std::size_t d = 0; d < S.size(); ++d) acc += S[d] * R[d] * std::conj(O[d]) * T[d];
  return acc.real();
}

ComplexVec randv(Rng& rng, std::size_t d) {
  ComplexVec v(d);
  for (auto& x : v.re) x = rng.normal();
  for (auto& x : v.im) x = rng.normal();
  return v;
}

ComplexVec fillv(std::size_t d, double re, double im) {
  ComplexVec v(d);
  std::fill(v.re.begin(), v.re.end(), re);
  std::fill(v.im.begin(), v.im.end(), im);
  return v;
}

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// central finite differences of a scalar function w.r.t. one ComplexVec
void fd_check(const std::function<double()>& f, ComplexVec& x, const ComplexVec& analytic,
              double tol, double h = 1e-5) {
  REQUIRE(analytic.dim() == x.dim());
  for (std::size_t d = 0; d < x.dim(); ++d) {
    for (int plane = 0; plane < 2; ++plane) {
      double& coord = plane == 0 ? x.re[d] : x.im[d];
      const double saved = coord;
      coord = saved + h;
      const double fp = f();
      coord = saved - h;
      const double fm = f();
      coord = saved;
      const double fd = (fp - fm) / (2 * h);
      const double an = plane == 0 ? analytic.re[d] : analytic.im[d];
      const double err = std::abs(fd - an) / std::max({1e-10, std::abs(fd), std::abs(an)});
      INFO("d=", d, " plane=", plane, " fd=", fd, " an=", an);
      CHECK(err <= tol);
    }
  }
}

}  // namespace

TEST_CASE("complex score: zero, ones, and the D=2 worked example") {
  const std::size_t D = 5;
  ComplexVec z = fillv(D, 0, 0);
  CHECK(complex_score(view(z), view(z), view(z)) == 0.0);

  ComplexVec ones = fillv(D, 1, 0);
  CHECK(complex_score(view(ones), view(ones), view(ones)) == static_cast<double>(D));

  // D=2: u_s=(1+2i, 0+1i), v_r=(0+1i, 1+0i), u_o=(1-1i, 2+0i)
  ComplexVec s({1, 0}, {2, 1});
  ComplexVec r({0, 1}, {1, 0});
  ComplexVec o({1, 2}, {-1, 0});
  CHECK(close(complex_score(view(s), view(r), view(o)), oracle_complex(s, r, o)));
}

TEST_CASE("score functions match the naive oracle on random instances") {
  Rng rng(123);
  for (std::size_t D : {2u, 4u, 8u, 64u}) {
    for (int rep = 0; rep < 50; ++rep) {
      ComplexVec s = randv(rng, D), r = randv(rng, D), o = randv(rng, D), t = randv(rng, D);
      CHECK(close(complex_score(view(s), view(r), view(o)), oracle_complex(s, r, o)));
      CHECK(close(tcomplex_score(view(s), view(r), view(o), view(t)),
                  oracle_tcomplex(s, r, o, t)));

      ComplexVec r2 = randv(rng, D);
      CHECK(close(tntcomplex_score(view(s), view(r), view(r2), view(o), view(t)),
                  oracle_tcomplex(s, r, o, t) + oracle_complex(s, r2, o)));

      ComplexVec so = randv(rng, D), st = randv(rng, D), ot = randv(rng, D),
                 ut = randv(rng, D);
      TimeplexWeights w{0.7, -0.3, 1.9};
      const double want = oracle_complex(s, so, o) + w.alpha * oracle_complex(s, st, ut) +
                          w.beta * oracle_complex(o, ot, ut) +
                          w.gamma * oracle_complex(s, o, ut);
      CHECK(close(timeplex_score(view(s), view(so), view(st), view(ot), view(o), view(ut), w),
                  want, 1e-11));
    }
  }
}

TEST_CASE("identity reductions hold exactly") {
  Rng rng(321);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t D = 1 + rng.uniform_u64(64);
    ComplexVec s = randv(rng, D), r = randv(rng, D), o = randv(rng, D);
    ComplexVec ones = fillv(D, 1, 0);
    ComplexVec zeros = fillv(D, 0, 0);

    // TComplEx with all-ones time factor == ComplEx, bitwise
    CHECK(tcomplex_score(view(s), view(r), view(o), view(ones)) ==
          complex_score(view(s), view(r), view(o)));

    // TComplEx with zero time factor == 0
    CHECK(tcomplex_score(view(s), view(r), view(o), view(zeros)) == 0.0);

    // TNTComplEx with zero time-relation == ComplEx on the static part
    ComplexVec t = randv(rng, D);
    CHECK(tntcomplex_score(view(s), view(zeros), view(r), view(o), view(t)) ==
          complex_score(view(s), view(r), view(o)));

    // TNTComplEx with all-ones time == sum of the two ComplEx parts
    ComplexVec r2 = randv(rng, D);
    CHECK(tntcomplex_score(view(s), view(r), view(r2), view(o), view(ones)) ==
          complex_score(view(s), view(r), view(o)) + complex_score(view(s), view(r2), view(o)));

    // TimePlex with alpha=beta=gamma=0 == ComplEx on the SO component
    ComplexVec st = randv(rng, D), ot = randv(rng, D), ut = randv(rng, D);
    CHECK(timeplex_score(view(s), view(r), view(st), view(ot), view(o), view(ut),
                         TimeplexWeights{0, 0, 0}) == complex_score(view(s), view(r), view(o)));
  }
}

TEST_CASE("entity scores: definitional substitution and oracle") {
  Rng rng(77);
  const std::size_t D = 2, n_rows = 5;
  ComplexTable table(n_rows, D);
  for (auto& x : table.re) x = rng.normal();
  for (auto& x : table.im) x = rng.normal();
  ComplexVec s = randv(rng, D), r = randv(rng, D), t = randv(rng, D);

  auto scores = entity_scores(expand_complex(r), view(s), view(t), table);
  REQUIRE(scores.size() == n_rows);
  for (std::size_t e = 0; e < n_rows; ++e) {
    ComplexVec row(D);
    for (std::size_t d = 0; d < D; ++d) {
      row.re[d] = table.row(e).re[d];
      row.im[d] = table.row(e).im[d];
    }
    CHECK(scores[e] == tcomplex_score(view(s), view(r), view(row), view(t)));
    CHECK(close(scores[e], oracle_tcomplex(s, r, row, t)));
  }

  ComplexVec zq = fillv(D, 0, 0);
  auto zero_scores = entity_scores(expand_complex(zq), view(s), view(t), table);
  for (double v : zero_scores) CHECK(v == 0.0);
}

TEST_CASE("time scores mirror the entity-score contract over timestamps") {
  Rng rng(78);
  const std::size_t D = 2, n_rows = 4;
  ComplexTable table(n_rows, D);
  for (auto& x : table.re) x = rng.normal();
  for (auto& x : table.im) x = rng.normal();
  ComplexVec s = randv(rng, D), r = randv(rng, D), o = randv(rng, D);

  auto scores = time_scores(expand_complex(r), view(s), view(o), table);
  REQUIRE(scores.size() == n_rows);
  for (std::size_t t = 0; t < n_rows; ++t) {
    ComplexVec row(D);
    for (std::size_t d = 0; d < D; ++d) {
      row.re[d] = table.row(t).re[d];
      row.im[d] = table.row(t).im[d];
    }
    CHECK(scores[t] == tcomplex_score(view(s), view(r), view(o), view(row)));
    CHECK(close(scores[t], oracle_tcomplex(s, r, o, row)));
  }

  ComplexVec zq = fillv(D, 0, 0);
  for (double v : time_scores(expand_complex(zq), view(s), view(o), table)) CHECK(v == 0.0);
}

TEST_CASE("answer distribution: softmax contract") {
  // |E|=3, |T|=2 worked example; leading slots are masked DUMMYs
  std::vector<double> es = {99.0, 1, 2, 3};
  std::vector<double> ts = {-99.0, 0, -1};
  auto p = answer_distribution(es, ts);
  REQUIRE(p.size() == 5);

  std::vector<double> raw = {1, 2, 3, 0, -1};
  double z = 0;
  for (double x : raw) z += std::exp(x);
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(close(p[i], std::exp(raw[i]) / z, 1e-12));

  double sum = 0;
  for (double x : p) sum += x;
  CHECK(std::abs(sum - 1.0) < 1e-9);

  // all equal -> uniform over unmasked slots
  auto u = answer_distribution({0.0, 5, 5}, {0.0, 5, 5});
  for (double x : u) CHECK(close(x, 0.25, 1e-12));

  // saturation
  auto s = answer_distribution({0.0, 1000.0, 0.0}, {0.0, 0.0});
  CHECK(s[0] > 0.999);

  // invariance under constant shifts
  auto p1 = answer_distribution({0.0, 1, 2}, {0.0, 3});
  auto p2 = answer_distribution({0.0, 101, 102}, {0.0, 103});
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(close(p1[i], p2[i], 1e-9));

  CHECK_THROWS(answer_distribution({0.0}, {0.0}));
}

TEST_CASE("expand/interp are mutual inverses") {
  Rng rng(5);
  ComplexVec one_two({1.0}, {2.0});
  auto e = expand_complex(one_two);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 2.0);

  for (int rep = 0; rep < 20; ++rep) {
    ComplexVec v = randv(rng, 1 + rng.uniform_u64(16));
    ComplexVec back = interp_expanded(expand_complex(v));
    CHECK(back.re == v.re);
    CHECK(back.im == v.im);
  }

  ComplexVec z = fillv(4, 0, 0);
  auto ez = expand_complex(z);
  for (double x : ez) CHECK(x == 0.0);

  CHECK_THROWS(interp_expanded(std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("dimension mismatches are rejected") {
  ComplexVec a = fillv(3, 1, 0), b = fillv(4, 1, 0);
  CHECK_THROWS(complex_score(view(a), view(a), view(b)));
  CHECK_THROWS(tcomplex_score(view(a), view(a), view(a), view(b)));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(999);
  const double tol = 1e-6;

  SUBCASE("complex score, including the u_s = 0 point") {
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t D = 8;
      ComplexVec s = rep == 0 ? fillv(D, 0, 0) : randv(rng, D);
      ComplexVec r = randv(rng, D), o = randv(rng, D);
      auto g = complex_score_grad(view(s), view(r), view(o));
      auto f_s = [&] { return complex_score(view(s), view(r), view(o)); };
      fd_check(f_s, s, g.wrt[0], tol);
      fd_check(f_s, r, g.wrt[1], tol);
      fd_check(f_s, o, g.wrt[2], tol);
    }
  }

  SUBCASE("tcomplex score on random D=8 instances") {
    for (int rep = 0; rep < 30; ++rep) {
      const std::size_t D = 8;
      ComplexVec s = randv(rng, D), r = randv(rng, D), o = randv(rng, D), t = randv(rng, D);
      auto g = tcomplex_score_grad(view(s), view(r), view(o), view(t));
      auto f = [&] { return tcomplex_score(view(s), view(r), view(o), view(t)); };
      fd_check(f, s, g.wrt[0], tol);
      fd_check(f, r, g.wrt[1], tol);
      fd_check(f, o, g.wrt[2], tol);
      fd_check(f, t, g.wrt[3], tol);
    }
  }

  SUBCASE("tntcomplex and timeplex") {
    for (int rep = 0; rep < 15; ++rep) {
      const std::size_t D = 4;
      ComplexVec s = randv(rng, D), rt = randv(rng, D), rs = randv(rng, D), o = randv(rng, D),
                 t = randv(rng, D);
      auto g = tntcomplex_score_grad(view(s), view(rt), view(rs), view(o), view(t));
      auto f = [&] {
        return tntcomplex_score(view(s), view(rt), view(rs), view(o), view(t));
      };
      fd_check(f, s, g.wrt[0], tol);
      fd_check(f, rt, g.wrt[1], tol);
      fd_check(f, rs, g.wrt[2], tol);
      fd_check(f, o, g.wrt[3], tol);
      fd_check(f, t, g.wrt[4], tol);

      ComplexVec so = randv(rng, D), st = randv(rng, D), ot = randv(rng, D), ut = randv(rng, D);
      TimeplexWeights w{1.3, 0.4, -0.8};
      auto g2 = timeplex_score_grad(view(s), view(so), view(st), view(ot), view(o), view(ut), w);
      auto f2 = [&] {
        return timeplex_score(view(s), view(so), view(st), view(ot), view(o), view(ut), w);
      };
      fd_check(f2, s, g2.wrt[0], tol);
      fd_check(f2, so, g2.wrt[1], tol);
      fd_check(f2, st, g2.wrt[2], tol);
      fd_check(f2, ot, g2.wrt[3], tol);
      fd_check(f2, o, g2.wrt[4], tol);
      fd_check(f2, ut, g2.wrt[5], tol);
    }
  }

  SUBCASE("gradient of an absent input is zero") {
    // w_t does not appear in complex_score; perturbing it keeps the score
    // constant, and the tcomplex gradient with all-ones w_t reduces exactly.
    const std::size_t D = 6;
    ComplexVec s = randv(rng, D), r = randv(rng, D), o = randv(rng, D);
    auto g3 = score_gradients(ModelTag::kComplex, {view(s), view(r), view(o)});
    CHECK(g3.wrt.size() == 3);
    const double base = score_value(ModelTag::kComplex, {view(s), view(r), view(o)});
    CHECK(base == complex_score(view(s), view(r), view(o)));
  }
}
