#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "phi/binmat.hpp"
#include "phi/packing.hpp"

namespace phi {

/// Per-event energy costs in picojoules. The defaults are placeholders for
/// relative comparisons only; they are not measured silicon numbers.
struct EnergyTable {
    double l1_add_pj = 0.03;              // one element add in the L1 adder tree
    double l2_add_pj = 0.03;              // one element add in the L2 adder tree
    double neuron_update_pj = 0.05;       // one LIF membrane update
    double matcher_compare_pj = 0.01;     // one k-bit pattern compare + popcount
    double buffer_read_pj_per_byte = 0.6;
    double buffer_write_pj_per_byte = 0.7;
    double dram_pj_per_byte = 20.0;
};

/// Hardware configuration of the modelled accelerator.
struct ArchConfig {
    TileSpec tile{16, 256, 32};
    std::uint32_t q = 128;  // patterns per partition = matcher array depth

    std::uint64_t pack_buffer_bytes = 4 * 1024;
    std::uint64_t weight_buffer_bytes = 16 * 1024;
    std::uint64_t pwp_buffer_bytes = 64 * 1024;
    std::uint64_t index_buffer_bytes = 28 * 1024;
    std::uint64_t psum_buffer_bytes = 128 * 1024;

    std::uint32_t adder_channels = 8;
    std::uint32_t l1_scan_width = 16;
    std::uint32_t l1_pwp_per_cycle = 8;
    std::uint32_t l2_pipeline_depth = 7;

    std::uint32_t weight_bytes = 4;  // bytes per weight / PWP / psum element
    std::uint32_t unit_bytes = 1;    // bytes per pack unit
    std::uint32_t pack_meta_bytes = 8;

    double dram_bytes_per_cycle = 128.0;  // 64 GB/s at 500 MHz
    double frequency_mhz = 500.0;

    PackerConfig packer;
    bool prefetch = true;
    EnergyTable energy;

    void validate() const;

    std::uint64_t total_buffer_bytes() const;
    /// Rescales all five buffers to the given total, keeping their ratios.
    void scale_buffers_to(std::uint64_t total_bytes);
};

/// Parses "key = value" lines ('#' starts a comment). Sizes accept K/KB/M/MB
/// suffixes. Unknown keys and malformed values raise ConfigError.
ArchConfig parse_arch_config(std::string_view text, ArchConfig base = {});
ArchConfig load_arch_config(const std::filesystem::path& path);
/// Canonical text form; parse_arch_config(to_config_text(c)) == c.
std::string to_config_text(const ArchConfig& cfg);

bool operator==(const EnergyTable&, const EnergyTable&);
bool operator==(const ArchConfig&, const ArchConfig&);

} // namespace phi
