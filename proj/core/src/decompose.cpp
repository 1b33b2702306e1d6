#include "phi/decompose.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "phi/error.hpp"

namespace phi {

namespace {

void check_sets(std::span<const PatternSet> sets, std::size_t K, const TileSpec& spec,
                const char* who) {
    spec.validate();
    if (sets.size() != spec.partitions(K))
        throw ShapeError(std::string(who) + ": expected " + std::to_string(spec.partitions(K)) +
                         " pattern sets, got " + std::to_string(sets.size()));
    for (const auto& s : sets)
        if (!s.empty() && s.k() != spec.k)
            throw ShapeError(std::string(who) + ": pattern length " + std::to_string(s.k()) +
                             " differs from k = " + std::to_string(spec.k));
}

// Columns of partition j that exist in a K-wide matrix.
std::uint64_t valid_mask(std::size_t j, std::size_t K, std::uint32_t k) {
    const std::size_t col0 = j * k;
    return low_mask(static_cast<std::uint32_t>(std::min<std::size_t>(k, K - col0)));
}

RowMatch match_masked(std::uint64_t row, const PatternSet& set, std::uint64_t mask) {
    RowMatch m;
    const auto b = popcount64(row);
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    std::uint64_t best_pattern = 0;
    const auto pats = set.patterns();
    for (std::size_t i = 0; i < pats.size(); ++i) {
        const auto p = pats[i] & mask;
        const auto d = hamming_bits(row, p);
        if (d < best) {
            best = d;
            m.id = static_cast<PatternId>(i + 1);
            best_pattern = p;
        }
    }
    if (best >= b) {
        m.id = 0;
        m.pos = row;
        return m;
    }
    m.pos = row & ~best_pattern;
    m.neg = best_pattern & ~row;
    return m;
}

} // namespace

std::size_t L1IndexMatrix::nnz() const {
    return static_cast<std::size_t>(
            std::count_if(ids_.begin(), ids_.end(), [](PatternId id) { return id != 0; }));
}

RowMatch match_row(std::uint64_t row, const PatternSet& patterns) {
    return match_masked(row, patterns, ~std::uint64_t{0});
}

RowMatch match_row(const BinaryVector& row, const PatternSet& patterns) {
    if (row.length != patterns.k())
        throw ShapeError("match_row: row length " + std::to_string(row.length) +
                         " differs from pattern length " + std::to_string(patterns.k()));
    return match_row(row.bits & low_mask(row.length), patterns);
}

Decomposition decompose(const BitMatrix& A, std::span<const PatternSet> sets,
                        const TileSpec& spec) {
    check_sets(sets, A.cols(), spec, "decompose");
    std::uint32_t q = 0;
    for (const auto& s : sets) q = std::max<std::uint32_t>(q, static_cast<std::uint32_t>(s.size()));

    Decomposition d{L1IndexMatrix(A.rows(), sets.size(), q), TernaryMatrix(A.rows(), A.cols())};
    for (std::size_t j = 0; j < sets.size(); ++j) {
        const auto mask = valid_mask(j, A.cols(), spec.k);
        for (std::size_t r = 0; r < A.rows(); ++r) {
            const auto m = match_masked(A.segment(r, j * spec.k, spec.k), sets[j], mask);
            d.l1.at(r, j) = m.id;
            if (m.pos | m.neg) d.l2.set_segment(r, j * spec.k, spec.k, m.pos, m.neg);
        }
    }
    return d;
}

BitMatrix reconstruct(const L1IndexMatrix& l1, std::span<const PatternSet> sets,
                      const TernaryMatrix& l2, const TileSpec& spec) {
    check_sets(sets, l2.cols(), spec, "reconstruct");
    if (l1.rows() != l2.rows() || l1.partitions() != sets.size())
        throw ShapeError("reconstruct: Level 1 and Level 2 shapes disagree");

    BitMatrix out(l2.rows(), l2.cols());
    for (std::size_t r = 0; r < l2.rows(); ++r) {
        for (std::size_t j = 0; j < sets.size(); ++j) {
            const auto id = l1.at(r, j);
            std::uint64_t pattern = 0;
            if (id != 0) {
                if (id > sets[j].size())
                    throw RangeError("reconstruct: pattern ID " + std::to_string(id) +
                                     " out of range in partition " + std::to_string(j));
                pattern = sets[j].pattern(id);
            }
            const std::size_t col0 = j * spec.k;
            const std::size_t width = std::min<std::size_t>(spec.k, l2.cols() - col0);
            const auto pos = l2.positive().segment(r, col0, spec.k);
            const auto neg = l2.negative().segment(r, col0, spec.k);
            for (std::size_t c = 0; c < width; ++c) {
                const int v = static_cast<int>((pattern >> c) & 1u) +
                              static_cast<int>((pos >> c) & 1u) -
                              static_cast<int>((neg >> c) & 1u);
                if (v < 0 || v > 1)
                    throw CorruptionError("reconstruct: entry (" + std::to_string(r) + ", " +
                                                  std::to_string(col0 + c) + ") is " +
                                                  std::to_string(v),
                                          r, col0 + c);
            }
            out.set_segment(r, col0, spec.k, ((pattern & ~neg) | pos) & low_mask(width));
        }
    }
    return out;
}

Speedups speedups_from_densities(double bit_density, double l2_density) {
    if (l2_density <= 0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return {bit_density / l2_density, 1.0 / l2_density};
}

PhiMetrics metrics(const BitMatrix& A, const L1IndexMatrix& l1,
                   std::span<const PatternSet> sets, const TernaryMatrix& l2,
                   const TileSpec& spec) {
    check_sets(sets, A.cols(), spec, "metrics");
    if (A.empty()) throw RangeError("metrics: empty activation matrix");
    if (l2.rows() != A.rows() || l2.cols() != A.cols() || l1.rows() != A.rows() ||
        l1.partitions() != sets.size())
        throw ShapeError("metrics: operand shapes disagree");

    PhiMetrics m;
    const double total = static_cast<double>(A.rows()) * static_cast<double>(A.cols());
    m.bit_ones = A.popcount();
    m.l2_pos = l2.positive_count();
    m.l2_neg = l2.negative_count();
    m.index_nnz = l1.nnz();

    double util_sum = 0;
    std::size_t util_parts = 0;
    for (std::size_t j = 0; j < sets.size(); ++j) {
        const auto mask = valid_mask(j, A.cols(), spec.k);
        std::vector<bool> used(sets[j].size() + 1, false);
        for (std::size_t r = 0; r < A.rows(); ++r) {
            const auto id = l1.at(r, j);
            if (id == 0) continue;
            if (id > sets[j].size()) throw RangeError("metrics: pattern ID out of range");
            used[id] = true;
            m.l1_expanded_ones += popcount64(sets[j].pattern(id) & mask);
        }
        if (!sets[j].empty()) {
            util_sum += static_cast<double>(std::count(used.begin() + 1, used.end(), true)) /
                        static_cast<double>(sets[j].size());
            ++util_parts;
        }
    }

    m.bit_density = static_cast<double>(m.bit_ones) / total;
    m.l1_density = static_cast<double>(m.l1_expanded_ones) / total;
    m.l2_pos_density = static_cast<double>(m.l2_pos) / total;
    m.l2_neg_density = static_cast<double>(m.l2_neg) / total;
    m.index_density = static_cast<double>(m.index_nnz) /
                      (static_cast<double>(A.rows()) * static_cast<double>(sets.size()));
    const auto s = speedups_from_densities(m.bit_density, m.l2_density());
    m.speedup_over_bit = s.over_bit;
    m.speedup_over_dense = s.over_dense;
    m.pwp_utilization = util_parts ? util_sum / static_cast<double>(util_parts) : 0.0;
    const auto online = m.index_nnz + m.l2_pos + m.l2_neg;
    m.total_op_speedup_over_bit = online ? static_cast<double>(m.bit_ones) / static_cast<double>(online)
                                         : std::numeric_limits<double>::infinity();
    return m;
}

std::uint64_t paft_regularizer(std::span<const RegularizerLayer> layers, const TileSpec& spec) {
    std::uint64_t total = 0;
    for (const auto& layer : layers) {
        if (layer.activations == nullptr) throw RangeError("paft_regularizer: null activations");
        const BitMatrix& A = *layer.activations;
        check_sets(layer.sets, A.cols(), spec, "paft_regularizer");
        std::uint64_t nnz = 0;
        for (std::size_t j = 0; j < layer.sets.size(); ++j) {
            const auto mask = valid_mask(j, A.cols(), spec.k);
            for (std::size_t r = 0; r < A.rows(); ++r)
                nnz += match_masked(A.segment(r, j * spec.k, spec.k), layer.sets[j], mask).nnz();
        }
        total += layer.n * nnz;
    }
    return total;
}

} // namespace phi
