#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <phi/corpus.hpp>
#include <phi/error.hpp>
#include <phi/formats.hpp>

using namespace phi;

namespace {

std::string bytes_of(const BitMatrix& A) {
    std::ostringstream os;
    write_bitmatrix(os, A);
    return os.str();
}

}  // namespace

TEST(Phia, HeaderAndLayout) {
    BitMatrix A(2, 9);
    A.set(0, 0, true);
    A.set(1, 8, true);
    const auto s = bytes_of(A);
    ASSERT_EQ(s.size(), 4u + 8u + 2u * 2u);
    EXPECT_EQ(s.substr(0, 4), "PHIA");
    EXPECT_EQ(static_cast<unsigned char>(s[4]), 2);
    EXPECT_EQ(static_cast<unsigned char>(s[8]), 9);
    EXPECT_EQ(static_cast<unsigned char>(s[12]), 0x01);
    EXPECT_EQ(static_cast<unsigned char>(s[15]), 0x01);
}

TEST(Phia, RoundTripRandom) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t M = 1 + rng() % 40, K = 1 + rng() % 100;
        const double d = static_cast<double>(rng() % 101) / 100.0;
        const auto A = random_bitmatrix(M, K, d, rng());
        std::istringstream is(bytes_of(A));
        ASSERT_EQ(read_bitmatrix(is), A) << M << "x" << K;
    }
}

TEST(Phia, RejectsMalformed) {
    const auto good = bytes_of(random_bitmatrix(3, 17, 0.5, 1));
    {
        std::istringstream is("PHIX" + good.substr(4));
        EXPECT_THROW(read_bitmatrix(is), FormatError);
    }
    {
        std::istringstream is(good.substr(0, good.size() - 1));
        EXPECT_THROW(read_bitmatrix(is), FormatError);
    }
    {
        std::string zero = good;
        zero[4] = zero[5] = zero[6] = zero[7] = 0;
        std::istringstream is(zero);
        EXPECT_THROW(read_bitmatrix(is), FormatError);
    }
}

TEST(Phiw, RoundTrip) {
    const auto W = random_weights(13, 7, 5, -1000, 1000);
    std::stringstream ss;
    write_weights(ss, W);
    EXPECT_EQ(read_weights(ss), W);
}

TEST(Phit, EncodingAndRoundTrip) {
    TernaryMatrix T(1, 5);
    T.set(0, 0, 1);
    T.set(0, 1, -1);
    T.set(0, 4, -1);
    std::stringstream ss;
    write_ternary(ss, T);
    const auto s = ss.str();
    ASSERT_EQ(s.size(), 12u + 2u);
    // 01 at entry 0, 11 at entry 1, 00, 00 | 11 at entry 4
    EXPECT_EQ(static_cast<unsigned char>(s[12]), 0x0D);
    EXPECT_EQ(static_cast<unsigned char>(s[13]), 0x03);
    EXPECT_EQ(read_ternary(ss), T);

    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        TernaryMatrix R(1 + rng() % 10, 1 + rng() % 50);
        for (std::size_t r = 0; r < R.rows(); ++r)
            for (std::size_t c = 0; c < R.cols(); ++c) R.set(r, c, static_cast<int>(rng() % 3) - 1);
        std::stringstream rs;
        write_ternary(rs, R);
        ASSERT_EQ(read_ternary(rs), R);
    }
}

TEST(Phit, RejectsInvalidCode) {
    TernaryMatrix T(1, 4);
    std::stringstream ss;
    write_ternary(ss, T);
    auto s = ss.str();
    s[12] = 0x02;  // code 10
    std::istringstream is(s);
    EXPECT_THROW(read_ternary(is), FormatError);
}

TEST(Phip, RoundTripWithShortSets) {
    std::vector<PatternSet> sets = {PatternSet(12, {0x003, 0xF00, 0x0A5}), PatternSet(12, {0x011}),
                                    PatternSet(12, {})};
    std::stringstream ss;
    write_patterns(ss, sets);
    const auto back = read_patterns(ss);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0], sets[0]);
    EXPECT_EQ(back[1], sets[1]);
    EXPECT_EQ(back[2].size(), 0u);
    EXPECT_EQ(back[2].k(), 12u);
}

TEST(Phip, RejectsOneHotPattern) {
    std::vector<PatternSet> sets = {PatternSet(8, {0x03})};
    std::stringstream ss;
    write_patterns(ss, sets);
    auto s = ss.str();
    s.back() = 0x04;
    std::istringstream is(s);
    EXPECT_THROW(read_patterns(is), FormatError);
}

TEST(Phii, WidthFollowsQ) {
    for (std::uint32_t q : {100u, 300u}) {
        L1IndexMatrix l1(3, 2, q);
        l1.at(0, 0) = 1;
        l1.at(2, 1) = static_cast<PatternId>(q);
        std::stringstream ss;
        write_indices(ss, l1);
        EXPECT_EQ(ss.str().size(), 16u + 6u * (q <= 255 ? 1u : 2u));
        EXPECT_EQ(read_indices(ss), l1);
    }
}

TEST(Phpw, RoundTrip) {
    const std::vector<PatternSet> sets = {PatternSet(4, {0x3, 0xF}), PatternSet(4, {0x6})};
    const auto W = random_weights(8, 3, 1);
    const auto table = build_pwp_table<std::int32_t>(sets, W, TileSpec{4});
    std::stringstream ss;
    write_pwp(ss, table);
    const auto back = read_pwp(ss);
    ASSERT_EQ(back.partitions(), 2u);
    for (std::size_t j = 0; j < 2; ++j)
        for (PatternId id = 1; id <= sets[j].size(); ++id)
            for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(back.row(j, id)[n], table.row(j, id)[n]);
}
