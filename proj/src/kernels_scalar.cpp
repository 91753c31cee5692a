// Scalar reference kernels. Every loop uses a single accumulator walked in
// ascending index order; the SIMD variants are tested for equivalence
// against these.

#include "tkgqa/kernels.hpp"

namespace tkgqa::kernels {
namespace {

double s_redot(const double* a_re, const double* a_im,
               const double* b_re, const double* b_im, std::size_t n) {
  double acc = 0.0;
  for (std::size_t d = 0; d < n; ++d)
    acc += a_re[d] * b_re[d] + a_im[d] * b_im[d];
  return acc;
}

void s_cmul(const double* a_re, const double* a_im,
            const double* b_re, const double* b_im,
            double* out_re, double* out_im, std::size_t n) {
  for (std::size_t d = 0; d < n; ++d) {
    const double re = a_re[d] * b_re[d] - a_im[d] * b_im[d];
    const double im = a_re[d] * b_im[d] + a_im[d] * b_re[d];
    out_re[d] = re;
    out_im[d] = im;
  }
}

void s_score_rows_conj(const double* c_re, const double* c_im,
                       const double* rows_re, const double* rows_im,
                       std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* e_re = rows_re + r * dim;
    const double* e_im = rows_im + r * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d)
      acc += c_re[d] * e_re[d] + c_im[d] * e_im[d];
    out[r] = acc;
  }
}

void s_score_rows_mid(const double* m_re, const double* m_im,
                      const double* o_re, const double* o_im,
                      const double* rows_re, const double* rows_im,
                      std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* t_re = rows_re + r * dim;
    const double* t_im = rows_im + r * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double p_re = m_re[d] * t_re[d] - m_im[d] * t_im[d];
      const double p_im = m_re[d] * t_im[d] + m_im[d] * t_re[d];
      acc += p_re * o_re[d] + p_im * o_im[d];
    }
    out[r] = acc;
  }
}

void s_axpy2(double w, const double* x_re, const double* x_im,
             double* acc_re, double* acc_im, std::size_t n) {
  for (std::size_t d = 0; d < n; ++d) {
    acc_re[d] += w * x_re[d];
    acc_im[d] += w * x_im[d];
  }
}

void s_weighted_rowsum(const double* w, const double* rows_re,
                       const double* rows_im, std::size_t n_rows,
                       std::size_t dim, double* acc_re, double* acc_im) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double wr = w[r];
    if (wr == 0.0) continue;
    const double* x_re = rows_re + r * dim;
    const double* x_im = rows_im + r * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      acc_re[d] += wr * x_re[d];
      acc_im[d] += wr * x_im[d];
    }
  }
}

void s_rank1_update(const double* w, const double* x_re, const double* x_im,
                    double* rows_re, double* rows_im, std::size_t n_rows,
                    std::size_t dim) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double wr = w[r];
    if (wr == 0.0) continue;
    double* a_re = rows_re + r * dim;
    double* a_im = rows_im + r * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      a_re[d] += wr * x_re[d];
      a_im[d] += wr * x_im[d];
    }
  }
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t d = 0; d < n; ++d) acc += a[d] * b[d];
  return acc;
}

void s_axpy(double w, const double* x, double* acc, std::size_t n) {
  for (std::size_t d = 0; d < n; ++d) acc[d] += w * x[d];
}

void s_gemm_nn(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C + i * ldc;
    for (std::size_t l = 0; l < k; ++l) {
      const double a = A[i * lda + l];
      if (a == 0.0) continue;
      const double* b = B + l * ldb;
      for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
    }
  }
}

void s_gemm_nt(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* a = A + i * lda;
    double* c = C + i * ldc;
    for (std::size_t j = 0; j < n; ++j) {
      const double* b = B + j * ldb;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += a[l] * b[l];
      c[j] += acc;
    }
  }
}

void s_gemm_tn(const double* A, std::size_t lda, const double* B, std::size_t ldb,
               double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t l = 0; l < k; ++l) {
    const double* b = B + l * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = A[l * lda + i];
      if (a == 0.0) continue;
      double* c = C + i * ldc;
      for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
    }
  }
}

const Ops kScalarOps = {
    "scalar",       s_redot, s_cmul, s_score_rows_conj, s_score_rows_mid,
    s_axpy2,        s_weighted_rowsum, s_rank1_update, s_dot, s_axpy,
    s_gemm_nn,      s_gemm_nt, s_gemm_tn,
};

}  // namespace

const Ops& scalar() { return kScalarOps; }

}  // namespace tkgqa::kernels
