#include "phi/compute.hpp"

#include <string>

namespace phi {

namespace {

inline void add_row(std::span<std::int64_t> dst, std::span<const std::int32_t> src, int sign) {
    for (std::size_t n = 0; n < dst.size(); ++n) {
        const std::int64_t v = sign > 0 ? std::int64_t{src[n]} : -std::int64_t{src[n]};
        if (__builtin_add_overflow(dst[n], v, &dst[n]))
            throw RangeError("matmul: 64-bit accumulator overflow");
    }
}

inline void add_row(std::span<double> dst, std::span<const float> src, int sign) {
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += sign * static_cast<double>(src[n]);
}

inline void add_acc(std::span<std::int64_t> dst, std::span<const std::int64_t> src) {
    for (std::size_t n = 0; n < dst.size(); ++n)
        if (__builtin_add_overflow(dst[n], src[n], &dst[n]))
            throw RangeError("matmul: 64-bit accumulator overflow");
}

inline void add_acc(std::span<double> dst, std::span<const double> src) {
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += src[n];
}

template <class W>
DenseMatrix<accumulator_t<W>> dense_impl(const BitMatrix& A, const DenseMatrix<W>& weights) {
    if (A.cols() != weights.rows())
        throw ShapeError("dense_matmul: A has " + std::to_string(A.cols()) +
                         " columns, W has " + std::to_string(weights.rows()) + " rows");
    DenseMatrix<accumulator_t<W>> out(A.rows(), weights.cols());
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c)
            if (A.get(r, c)) add_row(out.row(r), weights.row(c), +1);
    return out;
}

template <class W>
DenseMatrix<accumulator_t<W>> phi_impl(const L1IndexMatrix& l1, const TernaryMatrix& l2,
                                       const BasicPwpTable<W>& pwps,
                                       const DenseMatrix<W>& weights, const TileSpec& spec,
                                       PhiOpCount* ops) {
    spec.validate();
    if (l2.cols() != weights.rows())
        throw ShapeError("phi_matmul: Level 2 has " + std::to_string(l2.cols()) +
                         " columns, W has " + std::to_string(weights.rows()) + " rows");
    if (l1.rows() != l2.rows() || l1.partitions() != spec.partitions(l2.cols()))
        throw ShapeError("phi_matmul: Level 1 shape does not match Level 2");
    if (pwps.partitions() != l1.partitions() || pwps.cols() != weights.cols())
        throw ShapeError("phi_matmul: PWP table does not match the operands");

    PhiOpCount count;
    DenseMatrix<accumulator_t<W>> out(l2.rows(), weights.cols());
    for (std::size_t r = 0; r < l2.rows(); ++r) {
        auto dst = out.row(r);
        for (std::size_t j = 0; j < l1.partitions(); ++j) {
            const auto id = l1.at(r, j);
            if (id == 0) continue;
            if (id > pwps.patterns(j))
                throw RangeError("phi_matmul: pattern ID " + std::to_string(id) +
                                 " out of range in partition " + std::to_string(j));
            add_acc(dst, pwps.row(j, id));
            ++count.pwp_accumulations;
        }
        for (std::size_t j = 0; j < l1.partitions(); ++j) {
            const std::size_t col0 = j * spec.k;
            std::uint64_t pos = l2.positive().segment(r, col0, spec.k);
            std::uint64_t neg = l2.negative().segment(r, col0, spec.k);
            count.l2_accumulations += popcount64(pos) + popcount64(neg);
            while (pos) {
                add_row(dst, weights.row(col0 + static_cast<std::size_t>(std::countr_zero(pos))), +1);
                pos &= pos - 1;
            }
            while (neg) {
                add_row(dst, weights.row(col0 + static_cast<std::size_t>(std::countr_zero(neg))), -1);
                neg &= neg - 1;
            }
        }
    }
    if (ops) *ops = count;
    return out;
}

} // namespace

OutputMatrix dense_matmul(const BitMatrix& A, const WeightMatrix& weights) {
    return dense_impl(A, weights);
}

FloatOutputMatrix dense_matmul(const BitMatrix& A, const FloatWeightMatrix& weights) {
    return dense_impl(A, weights);
}

OutputMatrix phi_matmul(const L1IndexMatrix& l1, const TernaryMatrix& l2, const PwpTable& pwps,
                        const WeightMatrix& weights, const TileSpec& spec, PhiOpCount* ops) {
    return phi_impl(l1, l2, pwps, weights, spec, ops);
}

FloatOutputMatrix phi_matmul(const L1IndexMatrix& l1, const TernaryMatrix& l2,
                             const FloatPwpTable& pwps, const FloatWeightMatrix& weights,
                             const TileSpec& spec, PhiOpCount* ops) {
    return phi_impl(l1, l2, pwps, weights, spec, ops);
}

std::vector<std::uint8_t> lif_step(std::span<const std::int64_t> input, LifState& state) {
    if (input.size() != state.potential.size())
        throw ShapeError("lif_step: " + std::to_string(input.size()) + " inputs for " +
                         std::to_string(state.potential.size()) + " neurons");
    if (!(state.leak >= 0.0 && state.leak <= 1.0)) throw RangeError("lif_step: leak must be in [0, 1]");
    std::vector<std::uint8_t> spikes(input.size(), 0);
    for (std::size_t i = 0; i < input.size(); ++i) {
        auto& v = state.potential[i];
        v = state.leak * v + static_cast<double>(input[i]);
        if (v >= state.threshold) {
            spikes[i] = 1;
            v = 0.0;
        }
    }
    return spikes;
}

BitMatrix lif_run(const OutputMatrix& currents, LifState& state) {
    BitMatrix out(currents.rows(), currents.cols());
    for (std::size_t t = 0; t < currents.rows(); ++t) {
        const auto s = lif_step(currents.row(t), state);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i]) out.set(t, i, true);
    }
    return out;
}

} // namespace phi
