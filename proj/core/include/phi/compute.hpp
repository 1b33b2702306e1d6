#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <limits>
#include <span>
#include <vector>

#include "phi/binmat.hpp"
#include "phi/calibration.hpp"
#include "phi/decompose.hpp"
#include "phi/error.hpp"

namespace phi {

/// Dense row-major matrix.
template <class T>
class DenseMatrix {
public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
            : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// K x N quantized weights.
using WeightMatrix = DenseMatrix<std::int32_t>;
using FloatWeightMatrix = DenseMatrix<float>;
/// M x N exact products.
using OutputMatrix = DenseMatrix<std::int64_t>;
using FloatOutputMatrix = DenseMatrix<double>;

template <class W>
struct Accumulator;
template <>
struct Accumulator<std::int32_t> {
    using type = std::int64_t;
};
template <>
struct Accumulator<float> {
    using type = double;
};
template <class W>
using accumulator_t = typename Accumulator<W>::type;

/// Pattern-weight products for a whole layer: for every partition j and
/// pattern ID p, the sum of the weight rows selected by pattern p.
template <class W>
class BasicPwpTable {
public:
    using acc_type = accumulator_t<W>;

    BasicPwpTable() = default;
    BasicPwpTable(std::vector<DenseMatrix<acc_type>> per_partition, std::size_t cols)
            : parts_(std::move(per_partition)), cols_(cols) {}

    std::size_t partitions() const { return parts_.size(); }
    std::size_t cols() const { return cols_; }
    std::size_t patterns(std::size_t j) const { return parts_[j].rows(); }

    /// PWP row for a 1-based pattern ID.
    std::span<const acc_type> row(std::size_t j, PatternId id) const {
        return parts_[j].row(id - 1);
    }
    const DenseMatrix<acc_type>& partition(std::size_t j) const { return parts_[j]; }

    friend bool operator==(const BasicPwpTable&, const BasicPwpTable&) = default;

private:
    std::vector<DenseMatrix<acc_type>> parts_;
    std::size_t cols_ = 0;
};

using PwpTable = BasicPwpTable<std::int32_t>;
using FloatPwpTable = BasicPwpTable<float>;

/// Products of each pattern with a k x n weight tile (q x n result).
template <class W>
DenseMatrix<accumulator_t<W>> pwp_precompute(const PatternSet& set,
                                             const DenseMatrix<W>& w_tile) {
    if (w_tile.rows() != set.k())
        throw ShapeError("pwp_precompute: weight tile has " + std::to_string(w_tile.rows()) +
                         " rows, pattern length is " + std::to_string(set.k()));
    DenseMatrix<accumulator_t<W>> out(set.size(), w_tile.cols());
    for (std::size_t p = 0; p < set.size(); ++p) {
        auto dst = out.row(p);
        std::uint64_t bits = set.patterns()[p];
        while (bits) {
            const auto c = static_cast<std::size_t>(std::countr_zero(bits));
            bits &= bits - 1;
            const auto src = w_tile.row(c);
            for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += src[n];
        }
    }
    return out;
}

/// Rows [j*k, j*k + k) of W, zero padded past K.
template <class W>
DenseMatrix<W> weight_tile(const DenseMatrix<W>& weights, std::size_t j, std::uint32_t k) {
    DenseMatrix<W> t(k, weights.cols());
    for (std::uint32_t c = 0; c < k; ++c) {
        const std::size_t src = j * k + c;
        if (src >= weights.rows()) break;
        std::copy(weights.row(src).begin(), weights.row(src).end(), t.row(c).begin());
    }
    return t;
}

template <class W>
BasicPwpTable<W> build_pwp_table(std::span<const PatternSet> sets,
                                 const DenseMatrix<W>& weights, const TileSpec& spec) {
    if (sets.size() != spec.partitions(weights.rows()))
        throw ShapeError("build_pwp_table: pattern sets do not cover the weight rows");
    std::vector<DenseMatrix<accumulator_t<W>>> parts;
    parts.reserve(sets.size());
    for (std::size_t j = 0; j < sets.size(); ++j)
        parts.push_back(pwp_precompute(sets[j], weight_tile(weights, j, spec.k)));
    return BasicPwpTable<W>(std::move(parts), weights.cols());
}

/// Online accumulations performed by phi_matmul, in weight-row units
/// (each is one length-N vector add).
struct PhiOpCount {
    std::uint64_t pwp_accumulations = 0;  // one per nonzero pattern ID
    std::uint64_t l2_accumulations = 0;   // one per nonzero Level 2 entry

    std::uint64_t total() const { return pwp_accumulations + l2_accumulations; }
};

/// Exact A * W with 64-bit accumulation; RangeError on accumulator overflow.
OutputMatrix dense_matmul(const BitMatrix& A, const WeightMatrix& weights);
FloatOutputMatrix dense_matmul(const BitMatrix& A, const FloatWeightMatrix& weights);

/// Level 1 PWP retrieval plus signed Level 2 weight-row accumulation,
/// reduced over partitions.
OutputMatrix phi_matmul(const L1IndexMatrix& l1, const TernaryMatrix& l2,
                        const PwpTable& pwps, const WeightMatrix& weights,
                        const TileSpec& spec, PhiOpCount* ops = nullptr);
FloatOutputMatrix phi_matmul(const L1IndexMatrix& l1, const TernaryMatrix& l2,
                             const FloatPwpTable& pwps, const FloatWeightMatrix& weights,
                             const TileSpec& spec, PhiOpCount* ops = nullptr);

/// Bit-sparse baseline: one accumulation per '1' activation.
inline std::uint64_t bitsparse_ops(const BitMatrix& A) { return A.popcount(); }

/// Leaky integrate-and-fire population. A neuron fires when its potential
/// reaches the threshold and is then reset to zero.
struct LifState {
    std::vector<double> potential;
    double threshold = 1.0;
    double leak = 1.0;  // multiplicative decay in [0, 1]

    LifState() = default;
    LifState(std::size_t neurons, double threshold_, double leak_)
            : potential(neurons, 0.0), threshold(threshold_), leak(leak_) {}
};

/// v' = leak * v + input; spike where v' >= threshold, then reset.
std::vector<std::uint8_t> lif_step(std::span<const std::int64_t> input, LifState& state);

/// Treats each row of currents as one timestep and returns the spike matrix
/// that feeds the next layer.
BitMatrix lif_run(const OutputMatrix& currents, LifState& state);

} // namespace phi
