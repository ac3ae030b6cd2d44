#pragma once

// Dense and sparse numeric kernels. Each kernel has a plain serial reference used by the
// tests and the benchmark, and an optimized variant (cache-blocked, OpenMP-parallel over
// output rows) used everywhere else. Both produce identical results up to floating-point
// summation order; the optimized variants keep a fixed order per output element, so their
// results do not depend on the thread count.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace careerscape::kernels {

/// Row-major compressed sparse rows with constant values.
struct CsrMatrix {
  std::int32_t rows = 0;
  std::int32_t cols = 0;
  std::vector<std::int32_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  void push(std::int32_t c, double v) {
    col.push_back(c);
    val.push_back(v);
  }
  void end_row() {
    row_ptr.push_back(static_cast<std::int32_t>(col.size()));
    ++rows;
  }
  std::size_t nnz() const noexcept { return col.size(); }
};

// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);
void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);

// C[m x n] (+)= A[m x k] * B[n x k]^T
void gemm_nt_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);
void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);

// C[m x n] (+)= A[k x m]^T * B[k x n]
void gemm_tn_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);
void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate);

// Y[rows x n] (+)= S * X[cols x n]
void spmm_reference(const CsrMatrix& s, int n, const double* x, double* y, bool accumulate);
void spmm(const CsrMatrix& s, int n, const double* x, double* y, bool accumulate);

// X[cols x n] += S^T * Y[rows x n]
void spmm_transposed_reference(const CsrMatrix& s, int n, const double* y, double* x);
void spmm_transposed(const CsrMatrix& s, int n, const double* y, double* x);

/// Unordered pairs (i < j) of rows whose cosine similarity is >= tau. Rows must be nonzero.
std::vector<std::pair<std::int32_t, std::int32_t>> cosine_pairs_reference(
    std::span<const double> rows, int dim, double tau);
std::vector<std::pair<std::int32_t, std::int32_t>> cosine_pairs(std::span<const double> rows, int dim,
                                                                double tau);

/// Number of OpenMP threads the optimized kernels may use (1 without OpenMP).
int max_threads();

}  // namespace careerscape::kernels
