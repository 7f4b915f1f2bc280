// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "crbkit/info_metrics.hpp"
#include "crbkit/kernels.hpp"
#include "crbkit/noise_models.hpp"

namespace {

using namespace crbkit;

NoiseModel laplace3() {
  MatrixXd a(3, 3);
  a << 1, 0, 0, 0.5, 1, 0, 0.5, 0.5, 1;
  return make_shaped(BaseFamily::laplace(), a);
}

void BM_SampleSerial(benchmark::State& st) {
  const auto m = laplace3();
  for (auto _ : st) benchmark::DoNotOptimize(serial::sample(m, 1, static_cast<std::size_t>(st.range(0))));
}
void BM_SampleParallel(benchmark::State& st) {
  const auto m = laplace3();
  for (auto _ : st) benchmark::DoNotOptimize(sample(m, 1, static_cast<std::size_t>(st.range(0))));
}

void BM_FimMomentsSerial(benchmark::State& st) {
  const auto m = laplace3();
  const auto b = sample(m, 1, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    auto r = serial::entry_moments(b.count(), 3, 3, [&](std::size_t i, MatrixXd& out) {
      const VectorXd s = m.score(b.data.row(static_cast<Index>(i)).transpose());
      out.noalias() = s * s.transpose();
    });
    benchmark::DoNotOptimize(r.mean.data());
  }
}
void BM_FimMomentsParallel(benchmark::State& st) {
  const auto m = laplace3();
  const auto b = sample(m, 1, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    auto r = entry_moments(b.count(), 3, 3, [&](std::size_t i, MatrixXd& out) {
      const VectorXd s = m.score(b.data.row(static_cast<Index>(i)).transpose());
      out.noalias() = s * s.transpose();
    });
    benchmark::DoNotOptimize(r.mean.data());
  }
}

void BM_KnnBrute(benchmark::State& st) {
  const auto b = sample(laplace3(), 1, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::knn_distances(b.data, kKnnNeighbours));
}
void BM_KnnTree(benchmark::State& st) {
  const auto b = sample(laplace3(), 1, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(knn_distances(b.data, kKnnNeighbours));
}

BENCHMARK(BM_SampleSerial)->Arg(100000);
BENCHMARK(BM_SampleParallel)->Arg(100000);
BENCHMARK(BM_FimMomentsSerial)->Arg(100000);
BENCHMARK(BM_FimMomentsParallel)->Arg(100000);
BENCHMARK(BM_KnnBrute)->Arg(4000);
BENCHMARK(BM_KnnTree)->Arg(4000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
