// Serial reference kernels against their OpenMP builds. Threads per run are set with
// the benchmark argument; results are identical across both builds.

#include <benchmark/benchmark.h>

#include <vector>

#include "veplab/kernels.hpp"
#include "veplab/rng.hpp"

using namespace veplab;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

std::vector<RowMatrix> blocks(std::size_t count, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed, 1);
  std::vector<RowMatrix> out(count, RowMatrix(rows, cols));
  for (auto& b : out) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  }
  return out;
}

template <bool Parallel>
void lagged_gram(benchmark::State& state) {
  kernels::set_thread_count(static_cast<int>(state.range(0)));
  const auto s = noise(14400, 1);
  const auto r = noise(14400, 2);
  const int n_lags = 73;
  for (auto _ : state) {
    Eigen::MatrixXd sts = Eigen::MatrixXd::Zero(n_lags, n_lags);
    Eigen::VectorXd str = Eigen::VectorXd::Zero(n_lags);
    if constexpr (Parallel) {
      kernels::parallel::lagged_gram(s, r, 0, n_lags, sts, str);
    } else {
      kernels::serial::lagged_gram(s, r, 0, n_lags, sts, str);
    }
    benchmark::DoNotOptimize(sts.data());
  }
}

template <bool Parallel>
void lagged_filter(benchmark::State& state) {
  kernels::set_thread_count(static_cast<int>(state.range(0)));
  const auto s = noise(1 << 16, 3);
  const auto h = noise(121, 4);
  std::vector<double> out(s.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::lagged_filter(s, h, 0, out);
    } else {
      kernels::serial::lagged_filter(s, h, 0, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void scatter(benchmark::State& state) {
  kernels::set_thread_count(static_cast<int>(state.range(0)));
  const auto b = blocks(480, 16, 120, 5);
  for (auto _ : state) {
    Eigen::MatrixXd s;
    if constexpr (Parallel) {
      s = kernels::parallel::scatter(b);
    } else {
      s = kernels::serial::scatter(b);
    }
    benchmark::DoNotOptimize(s.data());
  }
}

template <bool Parallel>
void correlation_scores(benchmark::State& state) {
  kernels::set_thread_count(static_cast<int>(state.range(0)));
  const auto trials = blocks(480, 2, 120, 6);
  const auto templates = blocks(160, 2, 120, 7);
  for (auto _ : state) {
    kernels::ScoreTable t;
    if constexpr (Parallel) {
      t = kernels::parallel::correlation_scores(trials, templates, 120);
    } else {
      t = kernels::serial::correlation_scores(trials, templates, 120);
    }
    benchmark::DoNotOptimize(t.scores.data());
  }
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (int t : {1, 2, 4}) b->Arg(t);
  b->ArgName("threads")->Unit(benchmark::kMicrosecond)->UseRealTime();
}

}  // namespace

BENCHMARK(lagged_gram<false>)->Arg(1)->ArgName("threads")->Unit(benchmark::kMicrosecond);
BENCHMARK(lagged_gram<true>)->Apply(thread_args);
BENCHMARK(lagged_filter<false>)->Arg(1)->ArgName("threads")->Unit(benchmark::kMicrosecond);
BENCHMARK(lagged_filter<true>)->Apply(thread_args);
BENCHMARK(scatter<false>)->Arg(1)->ArgName("threads")->Unit(benchmark::kMicrosecond);
BENCHMARK(scatter<true>)->Apply(thread_args);
BENCHMARK(correlation_scores<false>)->Arg(1)->ArgName("threads")->Unit(benchmark::kMicrosecond);
BENCHMARK(correlation_scores<true>)->Apply(thread_args);

BENCHMARK_MAIN();
