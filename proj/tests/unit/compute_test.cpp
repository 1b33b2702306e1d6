#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include <phi/calibration.hpp>
#include <phi/compute.hpp>
#include <phi/corpus.hpp>
#include <phi/decompose.hpp>
#include <phi/error.hpp>

#include "oracles.hpp"

using namespace phi;

TEST(PwpPrecompute, SelectsWeightRows) {
    const auto W = random_weights(4, 5, 3);
    const PatternSet set(4, {0b0011, 0b1100});
    const auto p = pwp_precompute(set, W);
    for (std::size_t n = 0; n < 5; ++n) {
        EXPECT_EQ(p.at(0, n), std::int64_t{W.at(0, n)} + W.at(1, n));
        EXPECT_EQ(p.at(1, n), std::int64_t{W.at(2, n)} + W.at(3, n));
    }
    const auto empty = pwp_precompute(PatternSet(4, {}), W);
    EXPECT_EQ(empty.rows(), 0u);
}

TEST(PwpPrecompute, MatchesDenseProduct) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const unsigned k = 2 + static_cast<unsigned>(rng() % 20);
        std::vector<std::uint64_t> pats;
        while (pats.size() < 6) {
            const auto p = rng() & low_mask(k);
            if (oracle::ones(p, k) >= 2) pats.push_back(p);
        }
        const PatternSet set(k, pats);
        const auto W = random_weights(k, 7, rng());
        BitMatrix rows(pats.size(), k);
        for (std::size_t i = 0; i < pats.size(); ++i) rows.set_segment(i, 0, k, pats[i]);
        const auto want = oracle::matmul(rows, W);
        EXPECT_TRUE(oracle::same(pwp_precompute(set, W), want));
    }
}

TEST(PwpPrecompute, ShapeMismatch) {
    EXPECT_THROW(pwp_precompute(PatternSet(4, {0b11}), random_weights(5, 2, 1)), ShapeError);
}

TEST(DenseMatmul, Examples) {
    BitMatrix I(3, 3);
    for (std::size_t i = 0; i < 3; ++i) I.set(i, i, true);
    const auto W = random_weights(3, 4, 1);
    const auto out = dense_matmul(I, W);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(out.at(r, n), W.at(r, n));

    const auto zero = dense_matmul(BitMatrix(5, 3), W);
    for (auto v : zero.data()) EXPECT_EQ(v, 0);

    const auto A = random_bitmatrix(16, 32, 0.4, 2);
    const auto W2 = random_weights(32, 8, 2);
    EXPECT_TRUE(oracle::same(dense_matmul(A, W2), oracle::matmul(A, W2)));
    EXPECT_THROW(dense_matmul(A, W), ShapeError);
}

TEST(PhiMatmul, PureLevelOne) {
    const PatternSet set(4, {0b0011, 0b0110});
    BitMatrix A(2, 4);
    A.set_segment(0, 0, 4, 0b0011);
    A.set_segment(1, 0, 4, 0b0110);
    const std::vector<PatternSet> sets = {set};
    const auto W = random_weights(4, 3, 6);
    const auto d = decompose(A, sets, TileSpec{4});
    ASSERT_EQ(d.l2.nnz(), 0u);
    const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, TileSpec{4});
    PhiOpCount ops;
    const auto out = phi_matmul(d.l1, d.l2, pwps, W, TileSpec{4}, &ops);
    for (std::size_t n = 0; n < 3; ++n) {
        EXPECT_EQ(out.at(0, n), pwps.row(0, 1)[n]);
        EXPECT_EQ(out.at(1, n), pwps.row(0, 2)[n]);
    }
    EXPECT_EQ(ops.pwp_accumulations, 2u);
    EXPECT_EQ(ops.l2_accumulations, 0u);
}

TEST(PhiMatmul, NoPatternsEqualsBitSparse) {
    const auto A = random_bitmatrix(20, 40, 0.3, 4);
    const std::vector<PatternSet> sets(3, PatternSet(16, {}));
    const auto W = random_weights(40, 6, 4);
    const auto d = decompose(A, sets, TileSpec{16});
    const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, TileSpec{16});
    PhiOpCount ops;
    EXPECT_EQ(phi_matmul(d.l1, d.l2, pwps, W, TileSpec{16}, &ops), dense_matmul(A, W));
    EXPECT_EQ(ops.total(), bitsparse_ops(A));
}

TEST(PhiMatmul, EqualsDenseOnRandomInstances) {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t M = 1 + rng() % 64, K = 2 + rng() % 127, N = 1 + rng() % 32;
        const std::uint32_t k = 2 + static_cast<std::uint32_t>(rng() % 31);
        const auto A = random_bitmatrix(M, K, 0.02 + 0.5 * static_cast<double>(rng() % 100) / 100, rng());
        CalibrationConfig cfg;
        cfg.q = 1 + static_cast<std::uint32_t>(rng() % 16);
        cfg.sample_fraction = 1.0;
        cfg.seed = rng();
        const auto sets = calibrate(A, TileSpec{k}, cfg).sets;
        const auto W = random_weights(K, N, rng(), -100000, 100000);
        const auto d = decompose(A, sets, TileSpec{k});
        const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, TileSpec{k});
        PhiOpCount ops;
        const auto got = phi_matmul(d.l1, d.l2, pwps, W, TileSpec{k}, &ops);
        ASSERT_TRUE(oracle::same(got, oracle::matmul(A, W))) << "trial " << trial;
        ASSERT_EQ(ops.pwp_accumulations, d.l1.nnz());
        ASSERT_EQ(ops.l2_accumulations, d.l2.nnz());
    }
}

TEST(PhiMatmul, FloatWeightsWithinTolerance) {
    const auto A = random_bitmatrix(32, 64, 0.2, 31);
    CalibrationConfig cfg;
    cfg.q = 8;
    cfg.sample_fraction = 1.0;
    const auto sets = calibrate(A, TileSpec{16}, cfg).sets;
    const auto Wi = random_weights(64, 8, 31, -1 << 20, 1 << 20);
    FloatWeightMatrix W(64, 8);
    for (std::size_t i = 0; i < W.data().size(); ++i)
        W.data()[i] = static_cast<float>(Wi.data()[i]) / 65536.0f;
    const auto d = decompose(A, sets, TileSpec{16});
    const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, TileSpec{16});
    const auto got = phi_matmul(d.l1, d.l2, pwps, W, TileSpec{16});
    const auto want = dense_matmul(A, W);
    for (std::size_t i = 0; i < got.data().size(); ++i) {
        const double scale = std::max(1.0, std::abs(want.data()[i]));
        EXPECT_LE(std::abs(got.data()[i] - want.data()[i]) / scale, 1e-4);
    }
}

TEST(PhiMatmul, RejectsUnknownId) {
    const std::vector<PatternSet> sets = {PatternSet(4, {0b11})};
    const auto W = random_weights(4, 2, 1);
    const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, TileSpec{4});
    L1IndexMatrix l1(1, 1, 2);
    l1.at(0, 0) = 2;
    EXPECT_THROW(phi_matmul(l1, TernaryMatrix(1, 4), pwps, W, TileSpec{4}), RangeError);
}

TEST(DenseMatmul, Int32ExtremesAccumulateExactly) {
    BitMatrix A(1, 3);
    for (std::size_t c = 0; c < 3; ++c) A.set(0, c, true);
    WeightMatrix W(3, 1, std::numeric_limits<std::int32_t>::max());
    EXPECT_EQ(dense_matmul(A, W).at(0, 0), 3 * std::int64_t{std::numeric_limits<std::int32_t>::max()});
}

TEST(BitsparseOps, Counts) {
    EXPECT_EQ(bitsparse_ops(BitMatrix(10, 10)), 0u);
    const auto A = random_bitmatrix(100, 100, 0.5, 3);
    EXPECT_EQ(bitsparse_ops(A), A.popcount());
    EXPECT_NEAR(static_cast<double>(bitsparse_ops(A)), 5000.0, 300.0);
}

TEST(Lif, Semantics) {
    LifState s(3, 1.0, 1.0);
    const std::int64_t in[3] = {1, 0, 0};
    const auto spikes = lif_step(in, s);
    EXPECT_EQ(spikes, (std::vector<std::uint8_t>{1, 0, 0}));
    EXPECT_EQ(s.potential[0], 0.0);
    EXPECT_EQ(s.potential[1], 0.0);

    LifState leaky(1, 1.0, 0.5);
    leaky.potential[0] = 1.0;
    const std::int64_t zero[1] = {0};
    EXPECT_EQ(lif_step(zero, leaky)[0], 0);
    EXPECT_DOUBLE_EQ(leaky.potential[0], 0.5);

    const std::int64_t two[2] = {1, 1};
    EXPECT_THROW(lif_step(two, leaky), ShapeError);
}

TEST(Lif, IntegratorDegeneracy) {
    LifState s(4, std::numeric_limits<double>::infinity(), 1.0);
    const auto in = random_weights(20, 4, 8);
    std::vector<double> sum(4, 0.0);
    for (std::size_t t = 0; t < 20; ++t) {
        std::vector<std::int64_t> row(in.row(t).begin(), in.row(t).end());
        const auto spikes = lif_step(row, s);
        for (std::size_t i = 0; i < 4; ++i) {
            sum[i] += static_cast<double>(row[i]);
            EXPECT_EQ(spikes[i], 0);
            EXPECT_DOUBLE_EQ(s.potential[i], sum[i]);
        }
    }
}

TEST(Lif, ChainsIntoNextLayer) {
    const auto A = random_bitmatrix(8, 32, 0.3, 2);
    const auto W = random_weights(32, 16, 2, -4, 12);
    LifState s(16, 10.0, 0.9);
    const auto spikes = lif_run(dense_matmul(A, W), s);
    EXPECT_EQ(spikes.rows(), 8u);
    EXPECT_EQ(spikes.cols(), 16u);
    EXPECT_GT(spikes.popcount(), 0u);
}
