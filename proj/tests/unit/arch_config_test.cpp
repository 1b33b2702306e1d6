#include <gtest/gtest.h>

#include <phi/arch_config.hpp>
#include <phi/error.hpp>

using namespace phi;

TEST(ArchConfig, DefaultsMatchTheReferenceSetup) {
    const ArchConfig c;
    EXPECT_EQ(c.pack_buffer_bytes, 4096u);
    EXPECT_EQ(c.weight_buffer_bytes, 16384u);
    EXPECT_EQ(c.pwp_buffer_bytes, 65536u);
    EXPECT_EQ(c.index_buffer_bytes, 28672u);
    EXPECT_EQ(c.psum_buffer_bytes, 131072u);
    EXPECT_EQ(c.adder_channels, 8u);
    EXPECT_EQ(c.l1_scan_width, 16u);
    EXPECT_EQ(c.q, 128u);
    // 64 GB/s at 500 MHz
    EXPECT_DOUBLE_EQ(c.dram_bytes_per_cycle * c.frequency_mhz * 1e6, 64e9);
    EXPECT_NO_THROW(c.validate());
}

TEST(ArchConfig, ParsesKeysSizesAndComments) {
    const auto c = parse_arch_config(R"(
# comment
tile_k = 8
q=64            # trailing comment
pwp_buffer = 32KB
weight_buffer = 1M
prefetch = false
energy.dram_pj_per_byte = 12.5
)");
    EXPECT_EQ(c.tile.k, 8u);
    EXPECT_EQ(c.q, 64u);
    EXPECT_EQ(c.pwp_buffer_bytes, 32u * 1024);
    EXPECT_EQ(c.weight_buffer_bytes, 1024u * 1024);
    EXPECT_FALSE(c.prefetch);
    EXPECT_DOUBLE_EQ(c.energy.dram_pj_per_byte, 12.5);
    EXPECT_EQ(c.psum_buffer_bytes, ArchConfig{}.psum_buffer_bytes);
}

TEST(ArchConfig, RejectsBadInput) {
    EXPECT_THROW(parse_arch_config("nonsense = 1"), ConfigError);
    EXPECT_THROW(parse_arch_config("q"), ConfigError);
    EXPECT_THROW(parse_arch_config("q = abc"), ConfigError);
    EXPECT_THROW(parse_arch_config("dram_bytes_per_cycle = 0"), ConfigError);
    EXPECT_THROW(parse_arch_config("pack_buffer = 0"), ConfigError);
    EXPECT_THROW(parse_arch_config("tile_k = 70"), ConfigError);
    EXPECT_THROW(parse_arch_config("window_count = 0"), ConfigError);
    EXPECT_THROW(parse_arch_config("prefetch = maybe"), ConfigError);
}

TEST(ArchConfig, TextRoundTrip) {
    ArchConfig c;
    c.q = 300;
    c.tile = {32, 128, 16};
    c.dram_bytes_per_cycle = 0.1;
    c.energy.l2_add_pj = 1.0 / 3.0;
    c.prefetch = false;
    EXPECT_EQ(parse_arch_config(to_config_text(c)), c);
}

TEST(ArchConfig, ScaleBuffersKeepsRatios) {
    ArchConfig c;
    const auto before = c.total_buffer_bytes();
    c.scale_buffers_to(before * 2);
    EXPECT_EQ(c.total_buffer_bytes(), before * 2);
    EXPECT_EQ(c.pwp_buffer_bytes, 2u * 65536);
}

TEST(ArchConfig, LoadMissingFile) {
    EXPECT_THROW(load_arch_config("/nonexistent/phi.cfg"), ConfigError);
}
