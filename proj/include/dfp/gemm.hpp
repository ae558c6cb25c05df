#ifndef DFP_GEMM_HPP
#define DFP_GEMM_HPP

namespace dfp {

// C = alpha*op(A)*op(B) + beta*C, row-major. Backed by BLAS; pinned to one
// BLAS thread so results are reproducible run to run.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc);

}  // namespace dfp

#endif
