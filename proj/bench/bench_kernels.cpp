// Serial reference kernels against their OpenMP counterparts.
//
// Sizes straddle kParallelThreshold, so the smallest case measures the
// serial fallback of the OpenMP versions.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <random>
#include <vector>

#include "schloegl/kernels.hpp"

namespace {

namespace k = schloegl::kernels;

struct Data {
  std::vector<double> diag, off, x, y, out;

  explicit Data(std::size_t n) : diag(n), off(n - 1), x(n), y(n), out(n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : diag) v = 2.0 + u(rng);
    for (double& v : off) v = 0.5 * u(rng);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
  }
};

template <bool Parallel>
void BM_tridiag_apply(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::omp::tridiag_apply(d.diag, d.off, d.x, d.out);
    } else {
      k::reference::tridiag_apply(d.diag, d.off, d.x, d.out);
    }
    benchmark::DoNotOptimize(d.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_dot(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const double s = Parallel ? k::omp::dot(d.x, d.y) : k::reference::dot(d.x, d.y);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_l6_integral(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  const double h = 1.0 / static_cast<double>(state.range(0) - 1);
  for (auto _ : state) {
    const double s = Parallel ? k::omp::l6_integral(d.x, h) : k::reference::l6_integral(d.x, h);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_error_reaction(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::omp::error_reaction(d.x, d.y, -1.0, -3.0, d.out);
    } else {
      k::reference::error_reaction(d.x, d.y, -1.0, -3.0, d.out);
    }
    benchmark::DoNotOptimize(d.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {1001L, 1L << 16, 1L << 20}) b->Arg(n);
}

BENCHMARK(BM_tridiag_apply<false>)->Apply(sizes);
BENCHMARK(BM_tridiag_apply<true>)->Apply(sizes);
BENCHMARK(BM_dot<false>)->Apply(sizes);
BENCHMARK(BM_dot<true>)->Apply(sizes);
BENCHMARK(BM_l6_integral<false>)->Apply(sizes);
BENCHMARK(BM_l6_integral<true>)->Apply(sizes);
BENCHMARK(BM_error_reaction<false>)->Apply(sizes);
BENCHMARK(BM_error_reaction<true>)->Apply(sizes);

}  // namespace

BENCHMARK_MAIN();
