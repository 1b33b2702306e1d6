#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phi/arch_config.hpp"
#include "phi/calibration.hpp"
#include "phi/simulator.hpp"

namespace phi {

/// Cartesian grid over partition width, pattern count and total on-chip
/// buffer size. An empty axis keeps the base configuration's value.
struct SweepGrid {
    std::vector<std::uint32_t> k;
    std::vector<std::uint32_t> q;
    std::vector<std::uint64_t> buffer_bytes;

    std::size_t size() const;
};

/// Parses "k=8,16,32;q=64,128;buffer=60K,240K". Throws ConfigError on an
/// empty grid or malformed axis.
SweepGrid parse_sweep_grid(std::string_view text);

struct SweepPoint {
    std::uint32_t k = 0;
    std::uint32_t q = 0;
    std::uint64_t buffer_bytes = 0;
};

struct SweepRow {
    SweepPoint point;
    SimReport report;
};

/// Calibrates on `calibration` for every (k, q) and simulates `evaluation`
/// at every buffer size. Rows come out in grid order (k, then q, then buffer).
std::vector<SweepRow> run_sweep(const BitMatrix& calibration, const BitMatrix& evaluation,
                                const WeightMatrix& weights, const ArchConfig& base,
                                const CalibrationConfig& calib, const SweepGrid& grid);

/// Smallest buffer size from which DRAM bytes stop decreasing, for rows
/// sharing (k, q); nullopt if the last step still decreases.
std::optional<std::uint64_t> dram_plateau(const std::vector<SweepRow>& rows, std::uint32_t k,
                                          std::uint32_t q);

/// The k whose rows have the lowest Level 2 density.
std::uint32_t best_k_by_l2_density(const std::vector<SweepRow>& rows);

std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace phi
