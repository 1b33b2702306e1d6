#include <random>

#include <benchmark/benchmark.h>

#include <phi/phi.hpp>

namespace {

void BM_PackStream(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<phi::CompressedRow> rows;
    while (rows.size() < 20000) {
        const auto any = rng() & rng() & 0xFFFF;
        const auto neg = any & rng();
        if (auto c = phi::compress_row(any & ~neg, neg, static_cast<std::uint32_t>(rows.size() % 256),
                                       static_cast<std::uint32_t>(rng() % 16)))
            rows.push_back(phi::attach_psum(std::move(*c)));
    }
    phi::PackerConfig cfg;
    cfg.window_count = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) {
        auto packs = phi::pack_stream(rows, cfg);
        benchmark::DoNotOptimize(packs);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}
BENCHMARK(BM_PackStream)->Arg(1)->Arg(4)->Arg(16);

void BM_SimLayer(benchmark::State& state) {
    const auto A = phi::random_bitmatrix(2048, 256, 0.1, 6);
    const auto W = phi::random_weights(256, 128, 7);
    const auto sets = phi::calibrate(A, phi::TileSpec{16}, {}).sets;
    const auto dec = phi::decompose(A, sets, phi::TileSpec{16});
    const phi::ArchConfig cfg;
    for (auto _ : state) {
        auto r = phi::sim_layer(A, dec, W, sets, cfg);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_SimLayer)->Unit(benchmark::kMillisecond);

} // namespace
