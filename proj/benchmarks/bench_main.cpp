#include <benchmark/benchmark.h>

#include "nbavg/dataset.hpp"
#include "nbavg/detectors.hpp"
#include "nbavg/na.hpp"
#include "nbavg/neighbors.hpp"

namespace {

nbavg::Dataset make(std::size_t n, std::size_t dim) {
    return nbavg::standardize(nbavg::synth_clusters_with_outliers(n - n / 20, n / 20, dim, 1.0, 3));
}

void BM_KnnIndexed(benchmark::State& state) {
    const auto d = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(nbavg::knn_indexed(d, 100));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnIndexed)->Args({2000, 2})->Args({5000, 5})->Args({5000, 30})->Unit(benchmark::kMillisecond);

void BM_KnnBrute(benchmark::State& state) {
    const auto d = make(static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(nbavg::knn_brute(d, 100));
}
BENCHMARK(BM_KnnBrute)->Arg(2000)->Unit(benchmark::kMillisecond);

// One NA pass over a prebuilt graph; this is the cost added on top of a detector.
void BM_NeighborhoodAverage(benchmark::State& state) {
    const auto d = make(static_cast<std::size_t>(state.range(0)), 5);
    const auto g = nbavg::knn_indexed(d, 100);
    const auto s = nbavg::knn_score(d, g);
    for (auto _ : state) benchmark::DoNotOptimize(nbavg::neighborhood_average(g, s.scores));
}
BENCHMARK(BM_NeighborhoodAverage)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_Detector(benchmark::State& state) {
    const auto d = make(2000, 5);
    nbavg::DetectorConfig cfg;
    cfg.kind = static_cast<nbavg::DetectorKind>(state.range(0));
    cfg.k = 20;
    state.SetLabel(std::string(nbavg::to_string(cfg.kind)));
    for (auto _ : state) benchmark::DoNotOptimize(nbavg::run_detector(d, cfg));
}
BENCHMARK(BM_Detector)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
