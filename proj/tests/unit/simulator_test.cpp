#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <phi/calibration.hpp>
#include <phi/corpus.hpp>
#include <phi/error.hpp>
#include <phi/simulator.hpp>

using namespace phi;

namespace {

struct Layer {
    BitMatrix A;
    WeightMatrix W;
    std::vector<PatternSet> sets;
    Decomposition dec;
};

Layer make_layer(std::size_t M, std::size_t K, std::size_t N, double d, std::uint32_t q,
                 std::uint64_t seed) {
    Layer l;
    l.A = random_bitmatrix(M, K, d, seed);
    l.W = random_weights(K, N, seed);
    CalibrationConfig cfg;
    cfg.q = q;
    cfg.seed = seed;
    cfg.sample_fraction = 1.0;
    l.sets = calibrate(random_bitmatrix(M, K, d, seed + 1000), TileSpec{16}, cfg).sets;
    l.dec = decompose(l.A, l.sets, TileSpec{16});
    return l;
}

}  // namespace

TEST(Stages, PreprocessorFormula) {
    EXPECT_EQ(sim_preprocessor(256, 128), 384u);
    EXPECT_EQ(sim_preprocessor(0, 128), 128u);
    EXPECT_EQ(sim_preprocessor(1, 1), 2u);
}

TEST(Stages, L1GroupRule) {
    for (std::uint32_t nnz = 0; nnz <= 16; ++nnz) EXPECT_EQ(sim_l1_group(nnz), nnz <= 8 ? 1u : 2u);
    EXPECT_EQ(sim_l1_group(5), 1u);
    EXPECT_EQ(sim_l1_group(12), 2u);
}

TEST(Stages, L1ScanCountsAllZeroGroups) {
    L1IndexMatrix l1(10, 16, 128);
    EXPECT_EQ(sim_l1(l1, 0, 10, 0, 16), 10u);
    for (std::size_t j = 0; j < 12; ++j) l1.at(3, j) = 1;
    EXPECT_EQ(sim_l1(l1, 0, 10, 0, 16), 11u);
    EXPECT_EQ(sim_l1(l1, 0, 10, 0, 8), 10u);
    EXPECT_THROW(sim_l1(l1, 0, 11, 0, 16), RangeError);
}

TEST(Stages, L2Formula) {
    EXPECT_EQ(sim_l2(100), 107u);
    EXPECT_EQ(sim_l2(0), 7u);
    EXPECT_EQ(sim_l2(1), 8u);
}

TEST(Prefetch, SingleTile) {
    std::vector<PatternId> ids(256, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<PatternId>(i % 36);
    const auto t = sim_prefetch(ids, 128, 128);
    EXPECT_EQ(t.with_prefetch * 128, t.without_prefetch * 35);
    const std::vector<PatternId> zeros(64, 0);
    EXPECT_EQ(sim_prefetch(zeros, 128, 128).with_prefetch, 0u);
    const std::vector<PatternId> bad = {200};
    EXPECT_THROW(sim_prefetch(bad, 128, 4), RangeError);
}

TEST(LruBuffer, EvictsLeastRecentlyUsed) {
    LruBuffer b(100);
    EXPECT_FALSE(b.access(1, 40));
    EXPECT_FALSE(b.access(2, 40));
    EXPECT_TRUE(b.access(1, 40));
    EXPECT_FALSE(b.access(3, 40));  // evicts 2
    EXPECT_TRUE(b.access(1, 40));
    EXPECT_FALSE(b.access(2, 40));
    EXPECT_FALSE(b.access(9, 500));
    EXPECT_FALSE(b.access(9, 500));
}

TEST(Energy, AdditivityAndScaling) {
    EventCounts ev{10, 20, 30, 40, 50, 60, 70};
    EnergyTable t;
    const auto e = energy_of(ev, t);
    EXPECT_DOUBLE_EQ(e.total(), e.l1_add + e.l2_add + e.neuron + e.matcher + e.buffer_read +
                                        e.buffer_write + e.dram);
    EnergyTable scaled = t;
    scaled.dram_pj_per_byte *= 3.0;
    const auto s = energy_of(ev, scaled);
    EXPECT_DOUBLE_EQ(s.dram, 3.0 * e.dram);
    EXPECT_DOUBLE_EQ(s.l1_add, e.l1_add);
    EXPECT_DOUBLE_EQ(s.buffer_read, e.buffer_read);
}

TEST(SimLayer, BaselineOpCounts) {
    const auto l = make_layer(256, 256, 32, 0.1, 32, 1);
    const auto r = sim_layer(l.A, l.dec, l.W, l.sets, ArchConfig{});
    EXPECT_EQ(r.ops.dense, 2097152u);
    EXPECT_EQ(r.ops.bit_sparse, l.A.popcount() * 32);
    EXPECT_EQ(r.ops.phi_l2, l.dec.l2.nnz() * 32);
    EXPECT_EQ(r.dense.ops, r.ops.dense);
}

TEST(SimLayer, CycleBoundsAndOverlap) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto l = make_layer(700, 200 + 40 * seed, 70, 0.05 + 0.08 * static_cast<double>(seed), 64, seed);
        ArchConfig cfg;
        cfg.psum_buffer_bytes = 8 * 1024;
        cfg.pack_buffer_bytes = 1024;
        cfg.l1_scan_width = 4 + static_cast<std::uint32_t>(seed);
        const auto r = sim_layer(l.A, l.dec, l.W, l.sets, cfg);
        EXPECT_LE(r.total_cycles, r.stages.serial_sum());
        EXPECT_GE(r.total_cycles, r.stages.largest());
        std::uint64_t compute = 0;
        for (const auto& round : r.rounds) {
            EXPECT_LE(round.compute, round.stages.l1 + round.stages.l2 + round.stages.neuron + round.stages.dram);
            EXPECT_GE(round.compute, std::max({round.stages.l1, round.stages.l2, round.stages.neuron, round.stages.dram}));
            compute += round.compute;
        }
        EXPECT_EQ(compute, r.compute_cycles);
        EXPECT_EQ(r.pipeline_fill, r.rounds.front().stages.preprocessor);
        // Each pack takes a cycle per n-tile; the adder tree can do no better than 8 units per cycle.
        EXPECT_GE(r.stages.l2, (r.l2_units * r.n_tiles + 7) / 8);
    }
}

TEST(SimLayer, PrefetchNeverLoadsMore) {
    const auto l = make_layer(1024, 256, 64, 0.1, 128, 3);
    ArchConfig cfg;
    cfg.pwp_buffer_bytes = 20 * 1024;
    const auto r = sim_layer(l.A, l.dec, l.W, l.sets, cfg);
    for (const auto& t : r.pwp_tables) EXPECT_LE(t.with_prefetch, t.without_prefetch);
    EXPECT_EQ(r.dram.pwp, r.dram.pwp_with_prefetch);
    cfg.prefetch = false;
    const auto off = sim_layer(l.A, l.dec, l.W, l.sets, cfg);
    EXPECT_EQ(off.dram.pwp, off.dram.pwp_without_prefetch);
    EXPECT_EQ(off.dram.pwp_without_prefetch, r.dram.pwp_without_prefetch);
}

TEST(SimLayer, Deterministic) {
    const auto l = make_layer(300, 96, 40, 0.2, 16, 4);
    const auto a = sim_layer(l.A, l.dec, l.W, l.sets, ArchConfig{});
    const auto b = sim_layer(l.A, l.W, l.sets, ArchConfig{});
    EXPECT_EQ(a.total_cycles, b.total_cycles);
    EXPECT_EQ(a.dram.total(), b.dram.total());
    EXPECT_DOUBLE_EQ(a.energy.total(), b.energy.total());
}

TEST(SimLayer, DramNonIncreasingInBufferSize) {
    const auto l = make_layer(2048, 256, 128, 0.15, 128, 5);
    std::uint64_t prev = ~std::uint64_t{0};
    for (std::uint64_t kb : {16, 32, 64, 128, 256, 512, 1024, 4096}) {
        ArchConfig cfg;
        cfg.scale_buffers_to(kb * 1024);
        const auto bytes = sim_layer(l.A, l.dec, l.W, l.sets, cfg).dram.total();
        EXPECT_LE(bytes, prev) << kb << " KB";
        prev = bytes;
    }
}

TEST(SimLayer, EnergyComponentsSum) {
    const auto l = make_layer(256, 128, 32, 0.1, 32, 6);
    ArchConfig cfg;
    const auto r = sim_layer(l.A, l.dec, l.W, l.sets, cfg);
    EXPECT_NEAR(r.energy.total(), r.energy.l1_add + r.energy.l2_add + r.energy.neuron + r.energy.matcher +
                                          r.energy.buffer_read + r.energy.buffer_write + r.energy.dram,
                1e-9 * r.energy.total());
    cfg.energy.matcher_compare_pj *= 2;
    const auto s = sim_layer(l.A, l.dec, l.W, l.sets, cfg);
    EXPECT_DOUBLE_EQ(s.energy.matcher, 2 * r.energy.matcher);
    EXPECT_DOUBLE_EQ(s.energy.dram, r.energy.dram);
}

TEST(SimLayer, ShapeAndConfigErrors) {
    const auto l = make_layer(64, 32, 8, 0.1, 4, 7);
    EXPECT_THROW(sim_layer(l.A, l.dec, random_weights(31, 8, 1), l.sets, ArchConfig{}), ShapeError);
    ArchConfig bad;
    bad.dram_bytes_per_cycle = 0;
    EXPECT_THROW(sim_layer(l.A, l.dec, l.W, l.sets, bad), ConfigError);
}
