#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tkgqa::kernels {

// Inner-loop primitives behind all scoring, training and encoder math.
// Complex vectors are stored as two parallel double arrays (re, im);
// tables are row-major planes: re[row*dim + d], im[row*dim + d].
//
// Summation orders are fixed per variant:
//   scalar: single accumulator, ascending index.
//   avx2:   4 stride-interleaved lane accumulators, reduced low-to-high.
// Both orders are deterministic, so identities that rely on exact
// multiplication (e.g. by 1+0i) hold bitwise under either variant.
struct Ops {
  const char* name;

  // Re(sum_d a[d] * conj(b[d])) = sum_d a_re*b_re + a_im*b_im
  double (*redot)(const double* a_re, const double* a_im,
                  const double* b_re, const double* b_im, std::size_t n);

  // out = a * b elementwise (complex product); out may alias a
  void (*cmul)(const double* a_re, const double* a_im,
               const double* b_re, const double* b_im,
               double* out_re, double* out_im, std::size_t n);

  // out[r] = Re(sum_d c[d] * conj(rows[r][d]))
  void (*score_rows_conj)(const double* c_re, const double* c_im,
                          const double* rows_re, const double* rows_im,
                          std::size_t n_rows, std::size_t dim, double* out);

  // out[r] = Re(sum_d (m[d] * rows[r][d]) * conj(o[d]))
  void (*score_rows_mid)(const double* m_re, const double* m_im,
                         const double* o_re, const double* o_im,
                         const double* rows_re, const double* rows_im,
                         std::size_t n_rows, std::size_t dim, double* out);

  // acc += w * x on both planes
  void (*axpy2)(double w, const double* x_re, const double* x_im,
                double* acc_re, double* acc_im, std::size_t n);

  // acc[d] += sum_r w[r] * rows[r][d] on both planes
  void (*weighted_rowsum)(const double* w, const double* rows_re,
                          const double* rows_im, std::size_t n_rows,
                          std::size_t dim, double* acc_re, double* acc_im);

  // rows[r][d] += w[r] * x[d] on both planes (adjoint of weighted_rowsum)
  void (*rank1_update)(const double* w, const double* x_re, const double* x_im,
                       double* rows_re, double* rows_im, std::size_t n_rows,
                       std::size_t dim);

  // real dot product
  double (*dot)(const double* a, const double* b, std::size_t n);

  // acc += w * x (single plane)
  void (*axpy)(double w, const double* x, double* acc, std::size_t n);

  // Row-major GEMM with leading strides, C += A*B / A*B^T / A^T*B.
  // nn: A m x k (lda), B k x n (ldb), C m x n (ldc)
  // nt: A m x k (lda), B n x k (ldb), C m x n (ldc)
  // tn: A k x m (lda), B k x n (ldb), C m x n (ldc)
  void (*gemm_nn)(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                  double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n);
  void (*gemm_nt)(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                  double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n);
  void (*gemm_tn)(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                  double* C, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n);
};

// Reference implementation; always available, fixed ascending-order sums.
const Ops& scalar();

bool cpu_has_avx2();

#ifdef TKGQA_BUILD_AVX2
const Ops& avx2();
#endif

// Runtime-selected variant: TKGQA_KERNEL=scalar|avx2|auto (default auto).
// Selection happens once per process.
const Ops& active();

// All variants compiled in and runnable on this CPU (for equivalence tests).
std::vector<const Ops*> available();

}  // namespace tkgqa::kernels
