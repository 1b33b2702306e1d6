#include "phi/simulator.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "phi/error.hpp"

namespace phi {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint64_t dram_cycles(std::uint64_t bytes, double bytes_per_cycle) {
    if (bytes == 0) return 0;
    const double c = static_cast<double>(bytes) / bytes_per_cycle;
    auto whole = static_cast<std::uint64_t>(c);
    if (static_cast<double>(whole) < c) ++whole;
    return whole;
}

// Items that do not fit once the buffer has filled in order.
std::vector<bool> prefix_spilled(const std::vector<std::uint64_t>& items, std::uint64_t capacity) {
    std::vector<bool> spilled(items.size(), false);
    std::uint64_t used = 0;
    bool full = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!full && used + items[i] <= capacity) {
            used += items[i];
        } else {
            full = true;
            spilled[i] = true;
        }
    }
    return spilled;
}

double ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

std::uint64_t sim_preprocessor(std::uint64_t tile_rows, std::uint32_t q) { return tile_rows + q; }

std::uint64_t sim_l1_group(std::uint32_t nnz, std::uint32_t per_cycle) {
    if (per_cycle == 0) throw RangeError("sim_l1_group: per_cycle must be positive");
    return std::max<std::uint64_t>(1, ceil_div(nnz, per_cycle));
}

std::uint64_t sim_l1(const L1IndexMatrix& l1, std::size_t row0, std::size_t row1,
                     std::size_t part0, std::size_t part1, std::uint32_t scan_width,
                     std::uint32_t per_cycle) {
    if (row1 > l1.rows() || row0 > row1 || part1 > l1.partitions() || part0 > part1)
        throw RangeError("sim_l1: range outside the index matrix");
    if (scan_width == 0) throw RangeError("sim_l1: scan width must be positive");
    std::uint64_t cycles = 0;
    for (std::size_t r = row0; r < row1; ++r) {
        for (std::size_t g = part0; g < part1; g += scan_width) {
            std::uint32_t nnz = 0;
            const std::size_t end = std::min<std::size_t>(part1, g + scan_width);
            for (std::size_t j = g; j < end; ++j) nnz += l1.at(r, j) != 0;
            cycles += sim_l1_group(nnz, per_cycle);
        }
    }
    return cycles;
}

std::uint64_t sim_l2(std::uint64_t packs, std::uint32_t depth) { return packs + depth; }

PrefetchTraffic sim_prefetch(std::span<const PatternId> index_tile, std::uint32_t q,
                             std::uint64_t pwp_bytes) {
    std::vector<bool> used(static_cast<std::size_t>(q) + 1, false);
    std::uint64_t distinct = 0;
    for (auto id : index_tile) {
        if (id > q) throw RangeError("sim_prefetch: pattern ID " + std::to_string(id) + " > q");
        if (id != 0 && !used[id]) {
            used[id] = true;
            ++distinct;
        }
    }
    return {distinct * pwp_bytes, static_cast<std::uint64_t>(q) * pwp_bytes};
}

bool LruBuffer::access(std::uint64_t key, std::uint64_t bytes) {
    ++clock_;
    for (auto& e : entries_) {
        if (e.key == key) {
            e.stamp = clock_;
            return true;
        }
    }
    if (bytes > capacity_) return false;
    while (used_ + bytes > capacity_) {
        auto victim = std::min_element(entries_.begin(), entries_.end(),
                                       [](const Entry& a, const Entry& b) { return a.stamp < b.stamp; });
        used_ -= victim->bytes;
        entries_.erase(victim);
    }
    entries_.push_back({key, bytes, clock_});
    used_ += bytes;
    return false;
}

std::uint64_t StageCycles::largest() const {
    return std::max({preprocessor, l1, l2, neuron, dram});
}

EnergyBreakdown energy_of(const EventCounts& ev, const EnergyTable& t) {
    EnergyBreakdown e;
    e.l1_add = static_cast<double>(ev.l1_adds) * t.l1_add_pj;
    e.l2_add = static_cast<double>(ev.l2_adds) * t.l2_add_pj;
    e.neuron = static_cast<double>(ev.neuron_updates) * t.neuron_update_pj;
    e.matcher = static_cast<double>(ev.matcher_compares) * t.matcher_compare_pj;
    e.buffer_read = static_cast<double>(ev.buffer_read_bytes) * t.buffer_read_pj_per_byte;
    e.buffer_write = static_cast<double>(ev.buffer_write_bytes) * t.buffer_write_pj_per_byte;
    e.dram = static_cast<double>(ev.dram_bytes) * t.dram_pj_per_byte;
    return e;
}

double SimReport::speedup_over_dense() const { return ratio(dense.cycles, total_cycles); }
double SimReport::speedup_over_bit_sparse() const { return ratio(bit_sparse.cycles, total_cycles); }

SimReport sim_layer(const BitMatrix& A, const Decomposition& dec, const WeightMatrix& weights,
                    std::span<const PatternSet> sets, const ArchConfig& cfg) {
    cfg.validate();
    const TileSpec& spec = cfg.tile;
    const std::size_t M = A.rows(), K = A.cols(), N = weights.cols();
    if (A.empty() || N == 0) throw ShapeError("sim_layer: empty operands");
    if (weights.rows() != K)
        throw ShapeError("sim_layer: A has " + std::to_string(K) + " columns, W has " +
                         std::to_string(weights.rows()) + " rows");
    const std::size_t P = spec.partitions(K);
    if (sets.size() != P) throw ShapeError("sim_layer: pattern sets do not match K / k");
    for (const auto& s : sets)
        if (!s.empty() && s.k() != spec.k)
            throw ShapeError("sim_layer: pattern length differs from tile_k");
    if (dec.l1.rows() != M || dec.l1.partitions() != P || dec.l2.rows() != M || dec.l2.cols() != K)
        throw ShapeError("sim_layer: decomposition shape does not match A");

    SimReport rep;
    rep.M = M;
    rep.K = K;
    rep.N = N;
    const std::size_t S = cfg.l1_scan_width;
    const std::size_t G = ceil_div(P, S);
    rep.m_tiles = ceil_div(M, spec.m);
    rep.n_tiles = ceil_div(N, spec.n);
    rep.k_groups = G;
    rep.metrics = metrics(A, dec.l1, sets, dec.l2, spec);

    const std::uint64_t wb = cfg.weight_bytes;
    const std::uint64_t id_bytes = cfg.q <= 255 ? 1 : 2;
    const std::uint64_t pack_bytes = cfg.packer.capacity * std::uint64_t{cfg.unit_bytes} +
                                     cfg.pack_meta_bytes;
    const std::uint64_t row_bytes = (K + 7) / 8;

    LruBuffer weight_buf(cfg.weight_buffer_bytes);
    LruBuffer pwp_buf(cfg.pwp_buffer_bytes);
    // IDs each resident PWP table already holds under prefetching.
    std::vector<std::vector<bool>> loaded(P * rep.n_tiles);
    rep.pwp_tables.resize(P * rep.n_tiles);
    for (std::size_t j = 0; j < P; ++j)
        for (std::size_t c = 0; c < rep.n_tiles; ++c)
            rep.pwp_tables[j * rep.n_tiles + c] = {static_cast<std::uint32_t>(j),
                                                   static_cast<std::uint32_t>(c), 0, 0};

    std::vector<std::uint64_t> pre(rep.m_tiles, 0);
    std::uint64_t pack_units = 0, psum_units = 0, total_packs = 0;
    EventCounts& ev = rep.events;

    for (std::size_t i = 0; i < rep.m_tiles; ++i) {
        const std::size_t r0 = i * spec.m, r1 = std::min<std::size_t>(M, r0 + spec.m);
        const std::uint64_t R = r1 - r0;
        RoundCycles round;

        // Preprocessor: match, compress and pack the whole m-tile.
        std::vector<std::uint64_t> packs_per_part(P), pack_bytes_part(P), id_bytes_part(P);
        for (std::size_t j = 0; j < P; ++j) {
            const auto packs = pack_stream(compress_partition(dec.l2, j, spec.k, r0, r1), cfg.packer);
            packs_per_part[j] = packs.size();
            for (const auto& p : packs)
                for (const auto& u : p.units) (u.kind == UnitKind::psum ? psum_units : pack_units) += 1;
            pack_bytes_part[j] = packs.size() * pack_bytes;
            id_bytes_part[j] = R * id_bytes;
            total_packs += packs.size();
            ev.matcher_compares += R * sets[j].size();
        }
        std::uint64_t compact_bytes = 0, index_bytes = 0;
        for (std::size_t j = 0; j < P; ++j) {
            compact_bytes += pack_bytes_part[j];
            index_bytes += id_bytes_part[j];
        }
        ev.buffer_write_bytes += compact_bytes + index_bytes;
        ev.buffer_read_bytes += (compact_bytes + index_bytes) * rep.n_tiles;

        // Overflowing partitions are written out once and re-read per n-tile.
        const auto pack_spilled = prefix_spilled(pack_bytes_part, cfg.pack_buffer_bytes);
        const auto id_spilled = prefix_spilled(id_bytes_part, cfg.index_buffer_bytes);
        std::vector<std::uint64_t> spill_part(P, 0);
        std::uint64_t spill = 0;
        for (std::size_t j = 0; j < P; ++j) {
            spill_part[j] = (pack_spilled[j] ? pack_bytes_part[j] : 0) +
                            (id_spilled[j] ? id_bytes_part[j] : 0);
            spill += spill_part[j];
            if (pack_spilled[j]) rep.dram.activation_compact += pack_bytes_part[j] * (1 + rep.n_tiles);
            if (id_spilled[j]) rep.dram.index += id_bytes_part[j] * (1 + rep.n_tiles);
        }
        rep.dram.activation_raw += R * row_bytes;
        const std::uint64_t pre_fill = G * sim_preprocessor(R, cfg.q);
        pre[i] = std::max(pre_fill, dram_cycles(R * row_bytes + spill,
                                                cfg.dram_bytes_per_cycle));
        round.stages.preprocessor = pre[i];

        for (std::size_t c = 0; c < rep.n_tiles; ++c) {
            const std::size_t c0 = c * spec.n;
            const std::uint64_t nc = std::min<std::size_t>(N, c0 + spec.n) - c0;
            const std::uint64_t psum_tile = R * nc * wb;
            for (std::size_t g = 0; g < G; ++g) {
                const std::size_t j0 = g * S, j1 = std::min(P, j0 + S);
                StageCycles sub;
                sub.l1 = sim_l1(dec.l1, r0, r1, j0, j1, cfg.l1_scan_width, cfg.l1_pwp_per_cycle);
                std::uint64_t group_packs = 0;
                for (std::size_t j = j0; j < j1; ++j) group_packs += packs_per_part[j];
                sub.l2 = sim_l2(group_packs, cfg.l2_pipeline_depth);
                sub.neuron = g + 1 == G ? R : 0;

                std::uint64_t bytes = 0;
                for (std::size_t j = j0; j < j1; ++j) {
                    bytes += spill_part[j];
                    const std::uint64_t wt = std::uint64_t{spec.k} * nc * wb;
                    if (!weight_buf.access(j * rep.n_tiles + c, wt)) {
                        rep.dram.weight += wt;
                        bytes += wt;
                        ev.buffer_write_bytes += wt;
                    }

                    const std::size_t t = j * rep.n_tiles + c;
                    auto& table = rep.pwp_tables[t];
                    const std::uint64_t pwp_row = nc * wb;
                    std::vector<bool> used(sets[j].size() + 1, false);
                    std::uint64_t distinct = 0;
                    for (std::size_t r = r0; r < r1; ++r) {
                        const auto id = dec.l1.at(r, j);
                        if (id != 0 && !used[id]) {
                            used[id] = true;
                            ++distinct;
                        }
                    }
                    std::uint64_t with = 0, without = 0;
                    if (!pwp_buf.access(t, sets[j].size() * pwp_row)) {
                        without = sets[j].size() * pwp_row;
                        with = distinct * pwp_row;
                        loaded[t] = used;
                    } else {
                        auto& have = loaded[t];
                        for (std::size_t id = 1; id < used.size(); ++id) {
                            if (used[id] && !have[id]) {
                                have[id] = true;
                                with += pwp_row;
                            }
                        }
                    }
                    table.with_prefetch += with;
                    table.without_prefetch += without;
                    rep.dram.pwp_with_prefetch += with;
                    rep.dram.pwp_without_prefetch += without;
                    const std::uint64_t charged = cfg.prefetch ? with : without;
                    bytes += charged;
                    ev.buffer_write_bytes += charged;
                }
                if (g > 0 && psum_tile > cfg.psum_buffer_bytes) {
                    const std::uint64_t spill = 2 * (psum_tile - cfg.psum_buffer_bytes);
                    rep.dram.psum_spill += spill;
                    bytes += spill;
                }
                if (g + 1 == G) {
                    const std::uint64_t out = ceil_div(R * nc, 8);
                    rep.dram.output += out;
                    bytes += out;
                }
                sub.dram = dram_cycles(bytes, cfg.dram_bytes_per_cycle);

                round.compute += std::max({sub.l1, sub.l2, sub.neuron, sub.dram});
                rep.datapath_cycles += std::max({sub.l1, sub.l2, sub.neuron});
                round.stages.l1 += sub.l1;
                round.stages.l2 += sub.l2;
                round.stages.neuron += sub.neuron;
                round.stages.dram += sub.dram;
            }
            ev.buffer_write_bytes += psum_tile * G;
        }
        rep.stages.preprocessor += round.stages.preprocessor;
        rep.stages.l1 += round.stages.l1;
        rep.stages.l2 += round.stages.l2;
        rep.stages.neuron += round.stages.neuron;
        rep.stages.dram += round.stages.dram;
        rep.compute_cycles += round.compute;
        rep.rounds.push_back(round);
    }
    rep.dram.pwp = cfg.prefetch ? rep.dram.pwp_with_prefetch : rep.dram.pwp_without_prefetch;

    rep.pipeline_fill = pre.empty() ? 0 : pre.front();
    rep.total_cycles = rep.pipeline_fill;
    for (std::size_t i = 0; i < rep.m_tiles; ++i) {
        const std::uint64_t next = i + 1 < rep.m_tiles ? pre[i + 1] : 0;
        rep.total_cycles += std::max(next, rep.rounds[i].compute);
    }

    rep.packs = total_packs;
    rep.l2_units = pack_units + psum_units;
    rep.pack_utilization =
            total_packs ? static_cast<double>(rep.l2_units) /
                                  (static_cast<double>(total_packs) * cfg.packer.capacity)
                        : 0.0;

    const auto& m = rep.metrics;
    rep.ops.dense = static_cast<std::uint64_t>(M) * K * N;
    rep.ops.bit_sparse = m.bit_ones * N;
    rep.ops.phi_l1 = m.index_nnz * N;
    rep.ops.phi_l2 = (m.l2_pos + m.l2_neg) * N;
    rep.ops.psum_units = psum_units;

    ev.l1_adds = rep.ops.phi_l1;
    ev.l2_adds = rep.l2_units * N;
    ev.neuron_updates = static_cast<std::uint64_t>(M) * N;
    ev.buffer_read_bytes += (m.index_nnz + m.l2_pos + m.l2_neg + psum_units) * N * wb;
    ev.dram_bytes = rep.dram.total();
    rep.energy = energy_of(ev, cfg.energy);

    // Baselines share the 8-channel adder datapath and the raw-input DRAM model.
    const std::uint64_t ch = cfg.adder_channels;
    const std::uint64_t weight_all = static_cast<std::uint64_t>(K) * N * wb;
    const std::uint64_t weight_traffic =
            weight_all <= cfg.weight_buffer_bytes ? weight_all : weight_all * rep.m_tiles;
    const std::uint64_t base_dram = M * row_bytes + weight_traffic + rep.dram.output;
    std::uint64_t bit_cycles = 0;
    for (std::size_t r = 0; r < M; ++r) bit_cycles += ceil_div(A.row_popcount(r), ch);
    bit_cycles *= rep.n_tiles;
    const std::uint64_t dense_cycles = M * ceil_div(K, ch) * rep.n_tiles;

    rep.dense = {"dense", rep.ops.dense,
                 std::max(dense_cycles, dram_cycles(base_dram, cfg.dram_bytes_per_cycle)),
                 base_dram,
                 static_cast<double>(rep.ops.dense) * cfg.energy.l2_add_pj +
                         static_cast<double>(base_dram) * cfg.energy.dram_pj_per_byte};
    rep.bit_sparse = {"bit_sparse", rep.ops.bit_sparse,
                      std::max(bit_cycles, dram_cycles(base_dram, cfg.dram_bytes_per_cycle)),
                      base_dram,
                      static_cast<double>(rep.ops.bit_sparse) * cfg.energy.l2_add_pj +
                              static_cast<double>(base_dram) * cfg.energy.dram_pj_per_byte};
    return rep;
}

SimReport sim_layer(const BitMatrix& A, const WeightMatrix& weights,
                    std::span<const PatternSet> sets, const ArchConfig& cfg) {
    const auto dec = decompose(A, sets, cfg.tile);
    return sim_layer(A, dec, weights, sets, cfg);
}

} // namespace phi
