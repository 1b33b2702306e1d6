#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include <phi/packing.hpp>

using namespace phi;

namespace {

using Key = std::tuple<std::uint32_t, int, int, int>;  // row, kind, index, value

Key key_of(std::uint32_t row, const Unit& u) {
    // psum slot indices are rewritten by the packer, so they are not part of identity.
    return {row, static_cast<int>(u.kind), u.kind == UnitKind::psum ? -1 : u.index, u.value};
}

CompressedRow make_row(std::uint32_t row, std::uint32_t partition, std::uint32_t nonzeros) {
    CompressedRow r{row, partition, {}};
    for (std::uint32_t i = 0; i < nonzeros; ++i)
        r.units.push_back({UnitKind::nonzero, static_cast<std::uint8_t>(i), static_cast<std::int8_t>(i % 2 ? -1 : 1)});
    return attach_psum(r);
}

std::vector<CompressedRow> random_stream(std::mt19937_64& rng, std::size_t count) {
    std::vector<CompressedRow> rows;
    for (std::size_t i = 0; i < count; ++i) {
        const auto mask = rng() & rng() & 0xFFFF;
        const auto neg = mask & rng();
        auto c = compress_row(mask & ~neg, neg, static_cast<std::uint32_t>(rng() % 256),
                              static_cast<std::uint32_t>(rng() % 4));
        if (c) rows.push_back(attach_psum(*c));
    }
    return rows;
}

void check_invariants(const std::vector<Pack>& packs, const PackerConfig& cfg) {
    for (const auto& p : packs) {
        ASSERT_LE(p.units.size(), cfg.capacity);
        ASSERT_FALSE(p.units.empty());
        std::size_t sum = 0;
        std::set<std::uint32_t> banks, rows;
        std::uint8_t psum_slot = 0;
        for (const auto& s : p.rows) {
            sum += s.units;
            ASSERT_TRUE(rows.insert(s.row).second);
            ASSERT_TRUE(banks.insert(s.row % cfg.bank_count).second);
        }
        for (const auto& u : p.units) {
            if (u.kind == UnitKind::psum) {
                ASSERT_EQ(u.value, 1);
                ASSERT_EQ(u.index, psum_slot++);
            }
        }
        ASSERT_EQ(sum, p.units.size());
    }
}

std::multiset<Key> units_of(const std::vector<CompressedRow>& rows) {
    std::multiset<Key> out;
    for (const auto& r : rows)
        for (const auto& u : r.units) out.insert(key_of(r.row, u));
    return out;
}

std::multiset<Key> units_of(const std::vector<Pack>& packs) {
    std::multiset<Key> out;
    for (const auto& p : packs) {
        std::size_t at = 0;
        for (const auto& s : p.rows)
            for (std::uint8_t i = 0; i < s.units; ++i) out.insert(key_of(s.row, p.units[at++]));
    }
    return out;
}

}  // namespace

TEST(CompressRow, Examples) {
    EXPECT_FALSE(compress_row(0, 0, 0, 0).has_value());
    const auto r = compress_row(0b0001, 0b1000, 4, 0);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->units.size(), 2u);
    EXPECT_EQ(r->units[0], (Unit{UnitKind::nonzero, 0, 1}));
    EXPECT_EQ(r->units[1], (Unit{UnitKind::nonzero, 3, -1}));
    const auto fig = compress_row(0, 0b1000, 1, 0);
    ASSERT_EQ(fig->units.size(), 1u);
    EXPECT_EQ(fig->units[0], (Unit{UnitKind::nonzero, 3, -1}));
}

TEST(AttachPsum, OnlyAfterFirstPartition) {
    EXPECT_EQ(make_row(0, 1, 2).units.size(), 3u);
    EXPECT_EQ(make_row(0, 0, 2).units.size(), 2u);
    const auto r = make_row(0, 1, 2);
    EXPECT_EQ(r.units.back(), (Unit{UnitKind::psum, 0, 1}));
    EXPECT_EQ(attach_psum(r).units.size(), 3u);
}

TEST(SplitOversized, PsumTravelsWithLastPiece) {
    const auto row = make_row(5, 1, 8);
    ASSERT_EQ(row.units.size(), 9u);
    const auto parts = split_oversized(row, 8);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].units.size(), 8u);
    EXPECT_FALSE(parts[0].has_psum());
    EXPECT_TRUE(parts[1].has_psum());
    EXPECT_EQ(parts[1].row, 5u);

    const auto packs = pack_stream({row}, PackerConfig{});
    ASSERT_EQ(packs.size(), 2u);
    EXPECT_EQ(units_of(packs), units_of(std::vector<CompressedRow>{row}));

    const auto wide = make_row(3, 2, 20);
    const auto pieces = split_oversized(wide, 8);
    ASSERT_EQ(pieces.size(), 3u);
    EXPECT_EQ(pieces[2].units.size(), 5u);
}

TEST(PackStream, ThreeThreeTwoFillsOnePack) {
    const std::vector<CompressedRow> rows = {make_row(0, 0, 3), make_row(1, 0, 3), make_row(2, 0, 2)};
    const auto packs = pack_stream(rows, PackerConfig{});
    ASSERT_EQ(packs.size(), 1u);
    EXPECT_EQ(packs[0].units.size(), 8u);
    EXPECT_EQ(packs[0].rows.size(), 3u);
}

TEST(PackStream, SameBankNeverSharesAPack) {
    const std::vector<CompressedRow> rows = {make_row(3, 1, 1), make_row(11, 1, 1)};
    const auto packs = pack_stream(rows, PackerConfig{});
    ASSERT_EQ(packs.size(), 2u);
    check_invariants(packs, PackerConfig{});
}

TEST(PackStream, FullestWindowIsFlushedWhenNoneAccepts) {
    PackerConfig cfg;
    cfg.window_count = 2;
    Packer p(cfg);
    p.push(make_row(0, 0, 6));
    p.push(make_row(1, 0, 5));
    EXPECT_TRUE(p.packs().empty());
    p.push(make_row(2, 0, 4));  // fits neither: the 6-unit window leaves
    ASSERT_EQ(p.packs().size(), 1u);
    EXPECT_EQ(p.packs()[0].units.size(), 6u);
    EXPECT_EQ(p.open_units(), 9u);
    p.finish();
    EXPECT_EQ(p.open_units(), 0u);
    EXPECT_EQ(p.packs().size(), 3u);
}

TEST(PackStream, BestFitPrefersFullestWindow) {
    PackerConfig cfg;
    cfg.window_count = 2;
    Packer p(cfg);
    p.push(make_row(0, 0, 2));
    p.push(make_row(1, 0, 7));  // does not fit with row 0, opens window 2
    p.push(make_row(2, 0, 1));  // both accept; the 7-unit window is fuller
    p.finish();
    ASSERT_EQ(p.packs().size(), 2u);
    EXPECT_EQ(p.packs()[0].units.size(), 2u);
    EXPECT_EQ(p.packs()[1].units.size(), 8u);
}

TEST(PackStream, ConservationOnRandomStreams) {
    std::mt19937_64 rng(2718);
    for (std::uint32_t windows : {1u, 2u, 4u, 8u}) {
        PackerConfig cfg;
        cfg.window_count = windows;
        const auto rows = random_stream(rng, 10000);
        const auto packs = pack_stream(rows, cfg);
        check_invariants(packs, cfg);
        EXPECT_EQ(units_of(packs), units_of(rows));
    }
}

TEST(PackStream, MoreWindowsDoNotLowerUtilization) {
    std::mt19937_64 rng(31);
    double single = 0, multi = 0;
    for (int s = 0; s < 20; ++s) {
        const auto rows = random_stream(rng, 2000);
        PackerConfig one;
        one.window_count = 1;
        single += pack_utilization(pack_stream(rows, one));
        multi += pack_utilization(pack_stream(rows, PackerConfig{}));
    }
    EXPECT_GE(multi, single);
}

TEST(PackUtilization, Edges) {
    EXPECT_EQ(pack_utilization({}), 0.0);
    Pack p;
    p.units.resize(4);
    EXPECT_DOUBLE_EQ(pack_utilization({p}), 0.5);
}

TEST(PackerConfig, Validation) {
    PackerConfig cfg;
    cfg.window_count = 0;
    EXPECT_ANY_THROW(Packer{cfg});
}

TEST(CompressPartition, AttachesPsumAfterFirst) {
    TernaryMatrix l2(4, 32);
    l2.set(0, 1, 1);
    l2.set(2, 17, -1);
    l2.set(2, 18, 1);
    const auto p0 = compress_partition(l2, 0, 16, 0, 4);
    ASSERT_EQ(p0.size(), 1u);
    EXPECT_FALSE(p0[0].has_psum());
    const auto p1 = compress_partition(l2, 1, 16, 0, 4);
    ASSERT_EQ(p1.size(), 1u);
    EXPECT_EQ(p1[0].row, 2u);
    EXPECT_EQ(p1[0].units.size(), 3u);
    EXPECT_TRUE(p1[0].has_psum());
}
