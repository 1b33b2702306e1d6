#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "phi/binmat.hpp"
#include "phi/calibration.hpp"

namespace phi {

/// M x P matrix of pattern IDs (0 = no pattern): the Level 1 representation.
class L1IndexMatrix {
public:
    L1IndexMatrix() = default;
    L1IndexMatrix(std::size_t rows, std::size_t partitions, std::uint32_t q)
            : rows_(rows), partitions_(partitions), q_(q), ids_(rows * partitions, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t partitions() const { return partitions_; }
    /// Upper bound on IDs (max pattern-set size).
    std::uint32_t q() const { return q_; }

    PatternId at(std::size_t r, std::size_t j) const { return ids_[r * partitions_ + j]; }
    PatternId& at(std::size_t r, std::size_t j) { return ids_[r * partitions_ + j]; }
    std::span<const PatternId> ids() const { return ids_; }

    std::size_t nnz() const;

    friend bool operator==(const L1IndexMatrix&, const L1IndexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t partitions_ = 0;
    std::uint32_t q_ = 0;
    std::vector<PatternId> ids_;
};

/// Outcome of matching one tile row: the assigned ID and its Level 2
/// correction as two disjoint masks (+1 where row=1,pattern=0; -1 where
/// row=0,pattern=1).
struct RowMatch {
    PatternId id = 0;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;

    std::uint32_t nnz() const { return popcount64(pos) + popcount64(neg); }
};

/// Assigns the pattern with the smallest Hamming distance (lowest ID on
/// ties) when it is strictly below the row's popcount; otherwise ID 0 and
/// the row itself as the correction.
RowMatch match_row(std::uint64_t row, const PatternSet& patterns);

/// Checked variant; throws ShapeError if row.length != patterns.k().
RowMatch match_row(const BinaryVector& row, const PatternSet& patterns);

struct Decomposition {
    L1IndexMatrix l1;
    TernaryMatrix l2;
};

/// Runs match_row on every (row, partition). sets.size() must equal
/// ceil(K / k) and all sets must share spec.k.
Decomposition decompose(const BitMatrix& A, std::span<const PatternSet> sets,
                        const TileSpec& spec);

/// Expands IDs to patterns and adds L2. Throws CorruptionError (with the
/// first offending coordinate) if any entry falls outside {0,1}.
BitMatrix reconstruct(const L1IndexMatrix& l1, std::span<const PatternSet> sets,
                      const TernaryMatrix& l2, const TileSpec& spec);

/// Sparsity summary. Densities are fractions of M*K. Speedups are
/// +infinity when L2 has no nonzeros.
struct PhiMetrics {
    double bit_density = 0;
    double l1_density = 0;      // ones-density of the pattern-expanded Level 1 matrix
    double l2_pos_density = 0;
    double l2_neg_density = 0;
    double index_density = 0;   // fraction of nonzero pattern IDs
    double speedup_over_bit = 0;
    double speedup_over_dense = 0;
    /// Mean over partitions of (distinct IDs referenced / set size).
    double pwp_utilization = 0;
    /// (bit ones) / (L1 IDs + L2 nonzeros): counts Level 1 accumulations too.
    double total_op_speedup_over_bit = 0;

    std::size_t bit_ones = 0;
    std::size_t l1_expanded_ones = 0;
    std::size_t l2_pos = 0;
    std::size_t l2_neg = 0;
    std::size_t index_nnz = 0;

    double l2_density() const { return l2_pos_density + l2_neg_density; }
};

PhiMetrics metrics(const BitMatrix& A, const L1IndexMatrix& l1,
                   std::span<const PatternSet> sets, const TernaryMatrix& l2,
                   const TileSpec& spec);

struct Speedups {
    double over_bit;
    double over_dense;
};

/// Theoretical speedups from densities alone: bit / l2 and 1 / l2.
Speedups speedups_from_densities(double bit_density, double l2_density);

/// One layer's contribution to the fine-tuning regularizer.
struct RegularizerLayer {
    const BitMatrix* activations;
    std::uint64_t n;  // N dimension of the layer's matmul
    std::span<const PatternSet> sets;
};

/// Sum over layers of N_l times the Level 2 nonzero count under the
/// assignment rule of match_row.
std::uint64_t paft_regularizer(std::span<const RegularizerLayer> layers,
                               const TileSpec& spec);

} // namespace phi
