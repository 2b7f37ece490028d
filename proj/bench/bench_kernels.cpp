#include <benchmark/benchmark.h>

#include <vector>

#include "vitslim/kernels.hpp"
#include "vitslim/rng.hpp"

namespace k = vitslim::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  vitslim::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

// Square GEMM of side state.range(0).
template <auto Gemm>
void BM_gemm(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Gemm(k::GemmShape{1, n, n, n}, a, b, c, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

// Attention-shaped batched GEMM: batch·heads of [T×d]·[T×d]ᵀ.
template <auto Gemm>
void BM_attention_logits(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0)), t = 17, d = 8;
  const auto a = random_vec(batch * t * d, 3), b = random_vec(batch * t * d, 4);
  std::vector<double> c(batch * t * t);
  for (auto _ : state) {
    Gemm(k::GemmShape{batch, t, d, t}, a, b, c, false);
    benchmark::DoNotOptimize(c.data());
  }
}

template <auto Softmax>
void BM_softmax(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), n = 197;
  const auto x = random_vec(rows * n, 5);
  std::vector<double> y(rows * n);
  for (auto _ : state) {
    Softmax(rows, n, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Layernorm>
void BM_layernorm(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), n = 384;
  const auto x = random_vec(rows * n, 6), g = random_vec(n, 7), b = random_vec(n, 8);
  std::vector<double> y(rows * n), mean(rows), rstd(rows);
  for (auto _ : state) {
    Layernorm(rows, n, x, g, b, 1e-6, y, mean, rstd);
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Gelu>
void BM_gelu(benchmark::State& state) {
  const auto x = random_vec(static_cast<std::size_t>(state.range(0)), 9);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    Gelu(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm<k::serial::gemm_nn>)->Name("gemm_nn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_gemm<k::parallel::gemm_nn>)->Name("gemm_nn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_gemm<k::serial::gemm_tn>)->Name("gemm_tn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_gemm<k::parallel::gemm_tn>)->Name("gemm_tn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_attention_logits<k::serial::gemm_nt>)->Name("attention_logits/serial")->Arg(64)->Arg(768);
BENCHMARK(BM_attention_logits<k::parallel::gemm_nt>)->Name("attention_logits/parallel")->Arg(64)->Arg(768);
BENCHMARK(BM_softmax<k::serial::softmax_rows>)->Name("softmax/serial")->Arg(1024)->Arg(16384);
BENCHMARK(BM_softmax<k::parallel::softmax_rows>)->Name("softmax/parallel")->Arg(1024)->Arg(16384);
BENCHMARK(BM_layernorm<k::serial::layernorm_rows>)->Name("layernorm/serial")->Arg(197)->Arg(6304);
BENCHMARK(BM_layernorm<k::parallel::layernorm_rows>)->Name("layernorm/parallel")->Arg(197)->Arg(6304);
BENCHMARK(BM_gelu<k::serial::gelu>)->Name("gelu/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_gelu<k::parallel::gelu>)->Name("gelu/parallel")->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
