#include <benchmark/benchmark.h>

#include <phi/phi.hpp>

namespace {

void BM_Decompose(benchmark::State& state) {
    const double density = static_cast<double>(state.range(0)) / 100.0;
    const auto A = phi::random_bitmatrix(4096, 256, density, 1);
    phi::CalibrationConfig cfg;
    cfg.q = static_cast<std::uint32_t>(state.range(1));
    const auto sets = phi::calibrate(A, phi::TileSpec{16}, cfg).sets;
    for (auto _ : state) {
        auto d = phi::decompose(A, sets, phi::TileSpec{16});
        benchmark::DoNotOptimize(d);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(A.rows() * sets.size()));
}
BENCHMARK(BM_Decompose)->Args({5, 128})->Args({10, 128})->Args({50, 128})->Args({10, 512});

void BM_Reconstruct(benchmark::State& state) {
    const auto A = phi::random_bitmatrix(4096, 256, 0.1, 2);
    const auto sets = phi::calibrate(A, phi::TileSpec{16}, {}).sets;
    const auto d = phi::decompose(A, sets, phi::TileSpec{16});
    for (auto _ : state) {
        auto back = phi::reconstruct(d.l1, sets, d.l2, phi::TileSpec{16});
        benchmark::DoNotOptimize(back);
    }
}
BENCHMARK(BM_Reconstruct);

} // namespace
