#include <benchmark/benchmark.h>

#include <phi/phi.hpp>

namespace {

void BM_Calibrate(benchmark::State& state) {
    const auto A = phi::random_bitmatrix(16384, 256, 0.1, 8);
    phi::CalibrationConfig cfg;
    cfg.q = static_cast<std::uint32_t>(state.range(0));
    cfg.init = state.range(1) ? phi::CenterInit::plus_plus : phi::CenterInit::uniform;
    for (auto _ : state) {
        auto c = phi::calibrate(A, phi::TileSpec{16}, cfg);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_Calibrate)->Args({128, 0})->Args({128, 1})->Args({512, 0})->Unit(benchmark::kMillisecond);

void BM_ClusteringCost(benchmark::State& state) {
    const auto A = phi::random_bitmatrix(16384, 16, 0.1, 9);
    std::vector<std::uint64_t> rows;
    for (std::size_t r = 0; r < A.rows(); ++r) rows.push_back(A.segment(r, 0, 16));
    const auto usable = phi::filter_rows(rows);
    phi::CalibrationConfig cfg;
    auto rng = phi::partition_rng(0, 0);
    const auto res = phi::kmeans_binary(usable, 16, cfg, rng);
    for (auto _ : state) benchmark::DoNotOptimize(phi::clustering_cost(usable, res.patterns.patterns()));
}
BENCHMARK(BM_ClusteringCost);

} // namespace
