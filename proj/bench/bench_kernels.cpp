#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "careerscape/kernels.hpp"
#include "careerscape/runtime.hpp"

using namespace careerscape::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

using Gemm = void (*)(int, int, int, const double*, const double*, double*, bool);

template <Gemm F>
void bm_gemm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vec(static_cast<std::size_t>(n) * n, 1), b = random_vec(static_cast<std::size_t>(n) * n, 2);
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (auto _ : state) {
    F(n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

CsrMatrix random_csr(int rows, int cols, int per_row) {
  std::mt19937_64 rng(3);
  CsrMatrix s;
  s.cols = cols;
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < per_row; ++k) s.push(static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(cols)), 1.0 / per_row);
    s.end_row();
  }
  return s;
}

using Spmm = void (*)(const CsrMatrix&, int, const double*, double*, bool);

template <Spmm F>
void bm_spmm(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0)), n = 64;
  const auto s = random_csr(rows, rows, 8);
  const auto x = random_vec(static_cast<std::size_t>(rows) * n, 4);
  std::vector<double> y(static_cast<std::size_t>(rows) * n);
  for (auto _ : state) {
    F(s, n, x.data(), y.data(), false);
    benchmark::DoNotOptimize(y.data());
  }
}

using Cosine = std::vector<std::pair<std::int32_t, std::int32_t>> (*)(std::span<const double>, int, double);

template <Cosine F>
void bm_cosine(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0)), dim = 64;
  const auto rows = random_vec(static_cast<std::size_t>(count) * dim, 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(rows, dim, 0.3));
}

}  // namespace

BENCHMARK(bm_gemm<gemm_nn_reference>)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gemm<gemm_nn>)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gemm<gemm_nt_reference>)->Arg(128);
BENCHMARK(bm_gemm<gemm_nt>)->Arg(128);
BENCHMARK(bm_gemm<gemm_tn_reference>)->Arg(128);
BENCHMARK(bm_gemm<gemm_tn>)->Arg(128);
BENCHMARK(bm_spmm<spmm_reference>)->Arg(1000)->Arg(10000);
BENCHMARK(bm_spmm<spmm>)->Arg(1000)->Arg(10000);
BENCHMARK(bm_cosine<cosine_pairs_reference>)->Arg(500);
BENCHMARK(bm_cosine<cosine_pairs>)->Arg(500);

int main(int argc, char** argv) {
  careerscape::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
