// AVX2 kernel variants. Reduction order: four stride-interleaved lane
// accumulators (lane j holds indices d ≡ j mod 4), reduced as
// (l0+l2)+(l1+l3), then any scalar tail added in ascending order.
//
// Complex products deliberately avoid FMA (mul/mul/sub, mul/mul/add) so a
// single element product rounds identically to the scalar kernels; FMA is
// used only inside dot-product accumulators.

#include "tkgqa/kernels.hpp"

#include <immintrin.h>

namespace tkgqa::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);                     // (l0+l2, l1+l3)
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double redot_impl(const double* a_re, const double* a_im,
                         const double* b_re, const double* b_im, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a_re + d), _mm256_loadu_pd(b_re + d), acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a_im + d), _mm256_loadu_pd(b_im + d), acc);
  }
  double r = hsum(acc);
  for (; d < n; ++d) r += a_re[d] * b_re[d] + a_im[d] * b_im[d];
  return r;
}

double v_redot(const double* a_re, const double* a_im,
               const double* b_re, const double* b_im, std::size_t n) {
  return redot_impl(a_re, a_im, b_re, b_im, n);
}

void v_cmul(const double* a_re, const double* a_im,
            const double* b_re, const double* b_im,
            double* out_re, double* out_im, std::size_t n) {
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    __m256d ar = _mm256_loadu_pd(a_re + d), ai = _mm256_loadu_pd(a_im + d);
    __m256d br = _mm256_loadu_pd(b_re + d), bi = _mm256_loadu_pd(b_im + d);
    __m256d re = _mm256_sub_pd(_mm256_mul_pd(ar, br), _mm256_mul_pd(ai, bi));
    __m256d im = _mm256_add_pd(_mm256_mul_pd(ar, bi), _mm256_mul_pd(ai, br));
    _mm256_storeu_pd(out_re + d, re);
    _mm256_storeu_pd(out_im + d, im);
  }
  for (; d < n; ++d) {
    const double re = a_re[d] * b_re[d] - a_im[d] * b_im[d];
    const double im = a_re[d] * b_im[d] + a_im[d] * b_re[d];
    out_re[d] = re;
    out_im[d] = im;
  }
}

void v_score_rows_conj(const double* c_re, const double* c_im,
                       const double* rows_re, const double* rows_im,
                       std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r)
    out[r] = redot_impl(c_re, c_im, rows_re + r * dim, rows_im + r * dim, dim);
}

void v_score_rows_mid(const double* m_re, const double* m_im,
                      const double* o_re, const double* o_im,
                      const double* rows_re, const double* rows_im,
                      std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* t_re = rows_re + r * dim;
    const double* t_im = rows_im + r * dim;
    __m256d acc = _mm256_setzero_pd();
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      __m256d mr = _mm256_loadu_pd(m_re + d), mi = _mm256_loadu_pd(m_im + d);
      __m256d tr = _mm256_loadu_pd(t_re + d), ti = _mm256_loadu_pd(t_im + d);
      __m256d pr = _mm256_sub_pd(_mm256_mul_pd(mr, tr), _mm256_mul_pd(mi, ti));
      __m256d pi = _mm256_add_pd(_mm256_mul_pd(mr, ti), _mm256_mul_pd(mi, tr));
      acc = _mm256_fmadd_pd(pr, _mm256_loadu_pd(o_re + d), acc);
      acc = _mm256_fmadd_pd(pi, _mm256_loadu_pd(o_im + d), acc);
    }
    double s = hsum(acc);
    for (; d < dim; ++d) {
      const double p_re = m_re[d] * t_re[d] - m_im[d] * t_im[d];
      const double p_im = m_re[d] * t_im[d] + m_im[d] * t_re[d];
      s += p_re * o_re[d] + p_im * o_im[d];
    }
    out[r] = s;
  }
}

void v_axpy(double w, const double* x, double* acc, std::size_t n) {
  __m256d vw = _mm256_set1_pd(w);
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4)
    _mm256_storeu_pd(acc + d, _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + d),
                                              _mm256_loadu_pd(acc + d)));
  for (; d < n; ++d) acc[d] += w * x[d];
}

void v_axpy2(double w, const double* x_re, const double* x_im,
             double* acc_re, double* acc_im, std::size_t n) {
  v_axpy(w, x_re, acc_re, n);
  v_axpy(w, x_im, acc_im, n);
}

void v_weighted_rowsum(const double* w, const double* rows_re,
                       const double* rows_im, std::size_t n_rows,
                       std::size_t dim, double* acc_re, double* acc_im) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (w[r] == 0.0) continue;
    v_axpy(w[r], rows_re + r * dim, acc_re, dim);
    v_axpy(w[r], rows_im + r * dim, acc_im, dim);
  }
}

void v_rank1_update(const double* w, const double* x_re, const double* x_im,
                    double* rows_re, double* rows_im, std::size_t n_rows,
                    std::size_t dim) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (w[r] == 0.0) continue;
    v_axpy(w[r], x_re, rows_re + r * dim, dim);
    v_axpy(w[r], x_im, rows_im + r * dim, dim);
  }
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + d), _mm256_loadu_pd(b + d), acc);
  double r = hsum(acc);
  for (; d < n; ++d) r += a[d] * b[d];
  return r;
}

void v_gemm_nn(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C + i * ldc;
    for (std::size_t l = 0; l < k; ++l) {
      const double a = A[i * lda + l];
      if (a == 0.0) continue;
      v_axpy(a, B + l * ldb, c, n);
    }
  }
}

void v_gemm_nt(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* a = A + i * lda;
    double* c = C + i * ldc;
    for (std::size_t j = 0; j < n; ++j) c[j] += v_dot(a, B + j * ldb, k);
  }
}

void v_gemm_tn(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t l = 0; l < k; ++l) {
    const double* b = B + l * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = A[l * lda + i];
      if (a == 0.0) continue;
      v_axpy(a, b, C + i * ldc, n);
    }
  }
}

const Ops kAvx2Ops = {
    "avx2",   v_redot, v_cmul, v_score_rows_conj, v_score_rows_mid,
    v_axpy2,  v_weighted_rowsum, v_rank1_update, v_dot, v_axpy,
    v_gemm_nn, v_gemm_nt, v_gemm_tn,
};

}  // namespace

const Ops& avx2() { return kAvx2Ops; }

}  // namespace tkgqa::kernels
