#include "careerscape/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "careerscape/error.hpp"

namespace careerscape::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long kParallelWork = 1L << 16;

bool worth_parallel(long work) { return work >= kParallelWork && max_threads() > 1; }

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------

void gemm_nn_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
}

namespace {

constexpr int kTileRows = 4;
constexpr int kTileCols = 16;

// C[i0..i0+rows) += A * B over one row band, where A(i, p) = a[i * a_row + p * a_col] and B
// is k x n row-major. Accumulates a rows x kTileCols tile in registers per column block.
void gemm_band(int i0, int rows, int n, int k, const double* __restrict a, long a_row, long a_col,
               const double* __restrict b, double* __restrict c) {
  int j0 = 0;
  for (; j0 + kTileCols <= n; j0 += kTileCols) {
    if (rows == kTileRows) {
      double acc[kTileRows][kTileCols] = {};
      for (int p = 0; p < k; ++p) {
        const double* __restrict brow = b + static_cast<long>(p) * n + j0;
        for (int r = 0; r < kTileRows; ++r) {
          const double av = a[(i0 + r) * a_row + p * a_col];
#pragma omp simd
          for (int j = 0; j < kTileCols; ++j) acc[r][j] += av * brow[j];
        }
      }
      for (int r = 0; r < kTileRows; ++r) {
        double* crow = c + static_cast<long>(i0 + r) * n + j0;
#pragma omp simd
        for (int j = 0; j < kTileCols; ++j) crow[j] += acc[r][j];
      }
    } else {
      for (int r = 0; r < rows; ++r) {
        double acc[kTileCols] = {};
        for (int p = 0; p < k; ++p) {
          const double av = a[(i0 + r) * a_row + p * a_col];
          const double* __restrict brow = b + static_cast<long>(p) * n + j0;
#pragma omp simd
          for (int j = 0; j < kTileCols; ++j) acc[j] += av * brow[j];
        }
        double* crow = c + static_cast<long>(i0 + r) * n + j0;
        for (int j = 0; j < kTileCols; ++j) crow[j] += acc[j];
      }
    }
  }
  if (j0 == n) return;
  for (int r = 0; r < rows; ++r) {
    double* crow = c + static_cast<long>(i0 + r) * n;
    for (int p = 0; p < k; ++p) {
      const double av = a[(i0 + r) * a_row + p * a_col];
      const double* brow = b + static_cast<long>(p) * n;
      for (int j = j0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_strided(int m, int n, int k, const double* a, long a_row, long a_col, const double* b, double* c,
                  bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<long>(m) * n, 0.0);
  if (m == 0 || n == 0 || k == 0) return;
  const int bands = (m + kTileRows - 1) / kTileRows;
#pragma omp parallel for schedule(static) if (worth_parallel(static_cast<long>(m) * n * k))
  for (int band = 0; band < bands; ++band) {
    const int i0 = band * kTileRows;
    gemm_band(i0, std::min(kTileRows, m - i0), n, k, a, a_row, a_col, b, c);
  }
}

}  // namespace

void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  gemm_strided(m, n, k, a, k, 1, b, c, accumulate);
}

void gemm_nt_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
}

void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  // B is n x k; transposing it once lets the row-major kernel stream contiguous rows.
  std::vector<double> bt(static_cast<std::size_t>(k) * n);
  constexpr int kBlock = 16;
  for (int j0 = 0; j0 < n; j0 += kBlock)
    for (int p0 = 0; p0 < k; p0 += kBlock) {
      const int j1 = std::min(n, j0 + kBlock), p1 = std::min(k, p0 + kBlock);
      for (int j = j0; j < j1; ++j)
        for (int p = p0; p < p1; ++p) bt[static_cast<std::size_t>(p) * n + j] = b[static_cast<long>(j) * k + p];
    }
  gemm_strided(m, n, k, a, k, 1, bt.data(), c, accumulate);
}

void gemm_tn_reference(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
}

void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  gemm_strided(m, n, k, a, 1, m, b, c, accumulate);
}

// ---------------------------------------------------------------------------

void spmm_reference(const CsrMatrix& s, int n, const double* x, double* y, bool accumulate) {
  for (int r = 0; r < s.rows; ++r)
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? y[r * n + j] : 0.0;
      for (int e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) acc += s.val[e] * x[s.col[e] * n + j];
      y[r * n + j] = acc;
    }
}

void spmm(const CsrMatrix& s, int n, const double* __restrict x, double* __restrict y, bool accumulate) {
#pragma omp parallel for schedule(static) if (worth_parallel(static_cast<long>(s.nnz()) * n))
  for (int r = 0; r < s.rows; ++r) {
    double* __restrict yrow = y + static_cast<long>(r) * n;
    if (!accumulate) std::fill(yrow, yrow + n, 0.0);
    for (int e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) {
      const double w = s.val[e];
      const double* __restrict xrow = x + static_cast<long>(s.col[e]) * n;
      for (int j = 0; j < n; ++j) yrow[j] += w * xrow[j];
    }
  }
}

void spmm_transposed_reference(const CsrMatrix& s, int n, const double* y, double* x) {
  for (int r = 0; r < s.rows; ++r)
    for (int e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e)
      for (int j = 0; j < n; ++j) x[s.col[e] * n + j] += s.val[e] * y[r * n + j];
}

void spmm_transposed(const CsrMatrix& s, int n, const double* __restrict y, double* __restrict x) {
  // Scatter into X has write conflicts across rows; the serial order keeps results
  // independent of thread count.
  for (int r = 0; r < s.rows; ++r) {
    const double* __restrict yrow = y + static_cast<long>(r) * n;
    for (int e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) {
      const double w = s.val[e];
      double* __restrict xrow = x + static_cast<long>(s.col[e]) * n;
      for (int j = 0; j < n; ++j) xrow[j] += w * yrow[j];
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> row_norms(std::span<const double> rows, int dim) {
  const auto count = rows.size() / static_cast<std::size_t>(dim);
  std::vector<double> norms(count);
  for (std::size_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += rows[i * dim + d] * rows[i * dim + d];
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) throw DataError("cosine similarity of a zero-norm vector");
  }
  return norms;
}

}  // namespace

std::vector<std::pair<std::int32_t, std::int32_t>> cosine_pairs_reference(std::span<const double> rows,
                                                                          int dim, double tau) {
  const auto norms = row_norms(rows, dim);
  const auto count = static_cast<std::int32_t>(norms.size());
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  for (std::int32_t i = 0; i < count; ++i)
    for (std::int32_t j = i + 1; j < count; ++j) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += rows[i * dim + d] * rows[j * dim + d];
      if (dot / (norms[i] * norms[j]) >= tau) out.emplace_back(i, j);
    }
  return out;
}

std::vector<std::pair<std::int32_t, std::int32_t>> cosine_pairs(std::span<const double> rows, int dim,
                                                                double tau) {
  const auto norms = row_norms(rows, dim);
  const auto count = static_cast<std::int32_t>(norms.size());
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> per_row(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 16) if (worth_parallel(static_cast<long>(count) * count * dim / 2))
  for (std::int32_t i = 0; i < count; ++i) {
    const double* a = rows.data() + static_cast<long>(i) * dim;
    for (std::int32_t j = i + 1; j < count; ++j) {
      const double* b = rows.data() + static_cast<long>(j) * dim;
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += a[d] * b[d];
      if (dot / (norms[i] * norms[j]) >= tau) per_row[i].emplace_back(i, j);
    }
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  for (auto& v : per_row) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace careerscape::kernels
