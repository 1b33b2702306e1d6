#include <benchmark/benchmark.h>

#include <phi/phi.hpp>

namespace {

struct Fixture {
    phi::BitMatrix A;
    phi::WeightMatrix W;
    std::vector<phi::PatternSet> sets;
    phi::Decomposition dec;
    phi::PwpTable pwps;

    explicit Fixture(double density) {
        A = phi::random_bitmatrix(1024, 256, density, 3);
        W = phi::random_weights(256, 128, 4);
        sets = phi::calibrate(A, phi::TileSpec{16}, {}).sets;
        dec = phi::decompose(A, sets, phi::TileSpec{16});
        pwps = phi::build_pwp_table(std::span<const phi::PatternSet>(sets), W, phi::TileSpec{16});
    }
};

void BM_DenseMatmul(benchmark::State& state) {
    const Fixture f(static_cast<double>(state.range(0)) / 100.0);
    for (auto _ : state) {
        auto out = phi::dense_matmul(f.A, f.W);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_DenseMatmul)->Arg(5)->Arg(20)->Arg(50);

void BM_PhiMatmul(benchmark::State& state) {
    const Fixture f(static_cast<double>(state.range(0)) / 100.0);
    for (auto _ : state) {
        auto out = phi::phi_matmul(f.dec.l1, f.dec.l2, f.pwps, f.W, phi::TileSpec{16});
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_PhiMatmul)->Arg(5)->Arg(20)->Arg(50);

void BM_PwpPrecompute(benchmark::State& state) {
    const Fixture f(0.1);
    for (auto _ : state) {
        auto t = phi::build_pwp_table(std::span<const phi::PatternSet>(f.sets), f.W, phi::TileSpec{16});
        benchmark::DoNotOptimize(t);
    }
}
BENCHMARK(BM_PwpPrecompute);

} // namespace
