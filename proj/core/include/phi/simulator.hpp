#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phi/arch_config.hpp"
#include "phi/compute.hpp"
#include "phi/decompose.hpp"
#include "phi/packing.hpp"

namespace phi {

/// Matcher array: one row per cycle plus a fill latency equal to its depth.
std::uint64_t sim_preprocessor(std::uint64_t tile_rows, std::uint32_t q);

/// One scan group of the L1 processor: the group's nonzero IDs are issued
/// up to `per_cycle` at a time; an all-zero group still costs one cycle.
std::uint64_t sim_l1_group(std::uint32_t nnz, std::uint32_t per_cycle = 8);

/// Scans rows [row0,row1) over partitions [part0,part1) in groups of
/// scan_width consecutive IDs per row.
std::uint64_t sim_l1(const L1IndexMatrix& l1, std::size_t row0, std::size_t row1,
                     std::size_t part0, std::size_t part1, std::uint32_t scan_width = 16,
                     std::uint32_t per_cycle = 8);

/// One pack per cycle behind a fixed-depth pipeline.
std::uint64_t sim_l2(std::uint64_t packs, std::uint32_t depth = 7);

struct PrefetchTraffic {
    std::uint64_t with_prefetch = 0;
    std::uint64_t without_prefetch = 0;
};

/// Single visit of one index tile with no buffer reuse: the prefetcher
/// loads only referenced PWPs, the plain path loads all q.
PrefetchTraffic sim_prefetch(std::span<const PatternId> index_tile, std::uint32_t q,
                             std::uint64_t pwp_bytes);

/// Byte-granular LRU buffer used for residency decisions.
class LruBuffer {
public:
    explicit LruBuffer(std::uint64_t capacity) : capacity_(capacity) {}

    /// Returns true on a hit. A miss inserts the item, evicting least
    /// recently used items; items larger than the buffer are never kept.
    bool access(std::uint64_t key, std::uint64_t bytes);
    std::uint64_t capacity() const { return capacity_; }

private:
    struct Entry {
        std::uint64_t key;
        std::uint64_t bytes;
        std::uint64_t stamp;
    };
    std::uint64_t capacity_;
    std::uint64_t used_ = 0;
    std::uint64_t clock_ = 0;
    std::vector<Entry> entries_;
};

struct StageCycles {
    std::uint64_t preprocessor = 0;
    std::uint64_t l1 = 0;
    std::uint64_t l2 = 0;
    std::uint64_t neuron = 0;
    std::uint64_t dram = 0;

    std::uint64_t serial_sum() const { return preprocessor + l1 + l2 + neuron + dram; }
    std::uint64_t largest() const;
};

/// Cycles of one m-tile round; compute is the per-subtile max of the
/// L1/L2/neuron/DRAM stages summed over the round.
struct RoundCycles {
    StageCycles stages;
    std::uint64_t compute = 0;
};

struct DramTraffic {
    std::uint64_t activation_raw = 0;       // bit-packed input read by the preprocessor
    std::uint64_t activation_compact = 0;   // packs spilled and re-read
    std::uint64_t index = 0;                // pattern IDs spilled and re-read
    std::uint64_t weight = 0;
    std::uint64_t pwp = 0;                  // charged according to the prefetch setting
    std::uint64_t pwp_with_prefetch = 0;
    std::uint64_t pwp_without_prefetch = 0;
    std::uint64_t psum_spill = 0;
    std::uint64_t output = 0;

    std::uint64_t total() const {
        return activation_raw + activation_compact + index + weight + pwp + psum_spill + output;
    }
};

/// PWP traffic of one (partition, n-tile) table over the whole layer.
struct PwpTableTraffic {
    std::uint32_t partition = 0;
    std::uint32_t ntile = 0;
    std::uint64_t with_prefetch = 0;
    std::uint64_t without_prefetch = 0;
};

/// Energy in pJ, one component per energy-table entry.
struct EnergyBreakdown {
    double l1_add = 0;
    double l2_add = 0;
    double neuron = 0;
    double matcher = 0;
    double buffer_read = 0;
    double buffer_write = 0;
    double dram = 0;

    double total() const {
        return l1_add + l2_add + neuron + matcher + buffer_read + buffer_write + dram;
    }
};

/// Raw event counts the energy model multiplies by the table.
struct EventCounts {
    std::uint64_t l1_adds = 0;
    std::uint64_t l2_adds = 0;
    std::uint64_t neuron_updates = 0;
    std::uint64_t matcher_compares = 0;
    std::uint64_t buffer_read_bytes = 0;
    std::uint64_t buffer_write_bytes = 0;
    std::uint64_t dram_bytes = 0;
};

EnergyBreakdown energy_of(const EventCounts& events, const EnergyTable& table);

struct OperationCounts {
    std::uint64_t dense = 0;          // M*K*N
    std::uint64_t bit_sparse = 0;     // popcount(A)*N
    std::uint64_t phi_l1 = 0;         // nonzero IDs * N
    std::uint64_t phi_l2 = 0;         // Level 2 nonzeros * N
    std::uint64_t psum_units = 0;     // partial-sum units in packs
};

struct BaselineReport {
    std::string name;
    std::uint64_t ops = 0;
    std::uint64_t cycles = 0;
    std::uint64_t dram_bytes = 0;
    double energy_pj = 0;
};

struct SimReport {
    std::size_t M = 0, K = 0, N = 0;
    std::size_t m_tiles = 0, n_tiles = 0, k_groups = 0;

    StageCycles stages;             // per-stage totals
    std::vector<RoundCycles> rounds;
    std::uint64_t pipeline_fill = 0;
    std::uint64_t compute_cycles = 0;  // sum of rounds' compute
    /// Same schedule with free memory: per-subtile max of L1, L2 and neuron.
    std::uint64_t datapath_cycles = 0;
    std::uint64_t total_cycles = 0;

    std::uint64_t packs = 0;
    double pack_utilization = 0;
    std::uint64_t l2_units = 0;        // nonzero + psum units

    DramTraffic dram;
    std::vector<PwpTableTraffic> pwp_tables;
    EventCounts events;
    EnergyBreakdown energy;
    OperationCounts ops;
    PhiMetrics metrics;

    BaselineReport dense;
    BaselineReport bit_sparse;

    double speedup_over_dense() const;
    double speedup_over_bit_sparse() const;
};

/// Simulates one layer from an existing decomposition.
SimReport sim_layer(const BitMatrix& A, const Decomposition& dec, const WeightMatrix& weights,
                    std::span<const PatternSet> sets, const ArchConfig& cfg);

/// Decomposes A with the given pattern sets, then simulates.
SimReport sim_layer(const BitMatrix& A, const WeightMatrix& weights,
                    std::span<const PatternSet> sets, const ArchConfig& cfg);

} // namespace phi
