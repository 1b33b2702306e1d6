#include "phi/binmat.hpp"

#include <algorithm>
#include <string>

#include "phi/error.hpp"

namespace phi {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_((cols + 7) / 8), bits_(rows * stride_, 0) {}

void BitMatrix::assign_row_bytes(std::size_t r, std::span<const std::uint8_t> src) {
    if (src.size() != stride_)
        throw ShapeError("assign_row_bytes: expected " + std::to_string(stride_) + " bytes");
    std::copy(src.begin(), src.end(), bits_.begin() + static_cast<std::ptrdiff_t>(r * stride_));
    if (cols_ % 8 != 0) {
        auto& last = bits_[r * stride_ + stride_ - 1];
        last = static_cast<std::uint8_t>(last & ((1u << (cols_ % 8)) - 1));
    }
}

std::uint64_t BitMatrix::segment(std::size_t r, std::size_t col0, std::uint32_t width) const {
    if (width == 0 || col0 >= cols_) return 0;
    const std::size_t end = std::min(cols_, col0 + width);
    const std::uint8_t* row = bits_.data() + r * stride_;
    std::uint64_t out = 0;
    std::size_t c = col0;
    while (c < end) {
        const std::size_t byte = c / 8;
        const unsigned shift = c % 8;
        const std::size_t take = std::min<std::size_t>(8 - shift, end - c);
        const std::uint64_t chunk = (row[byte] >> shift) & ((1u << take) - 1);
        out |= chunk << (c - col0);
        c += take;
    }
    return out;
}

void BitMatrix::set_segment(std::size_t r, std::size_t col0, std::uint32_t width,
                            std::uint64_t value) {
    const std::size_t end = std::min(cols_, col0 + width);
    for (std::size_t c = col0; c < end; ++c) set(r, c, (value >> (c - col0)) & 1u);
}

std::size_t BitMatrix::row_popcount(std::size_t r) const {
    std::size_t n = 0;
    for (auto b : row_bytes(r)) n += static_cast<std::size_t>(std::popcount(b));
    return n;
}

std::size_t BitMatrix::popcount() const {
    std::size_t n = 0;
    for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
    return n;
}

void TernaryMatrix::set(std::size_t r, std::size_t c, int v) {
    if (v < -1 || v > 1) throw RangeError("ternary entry must be -1, 0 or +1");
    pos_.set(r, c, v == 1);
    neg_.set(r, c, v == -1);
}

void TernaryMatrix::set_segment(std::size_t r, std::size_t col0, std::uint32_t width,
                                std::uint64_t pos_mask, std::uint64_t neg_mask) {
    pos_.set_segment(r, col0, width, pos_mask);
    neg_.set_segment(r, col0, width, neg_mask);
}

double TernaryMatrix::density() const {
    if (rows() == 0 || cols() == 0) throw RangeError("density of an empty matrix");
    return static_cast<double>(nnz()) / (static_cast<double>(rows()) * static_cast<double>(cols()));
}

void TileSpec::validate() const {
    if (k < 2 || k > kMaxPartitionWidth)
        throw RangeError("partition width k must be in [2, 64], got " + std::to_string(k));
    if (m == 0 || n == 0) throw RangeError("tile sizes m and n must be positive");
}

BitMatrix tile(const BitMatrix& A, std::size_t j, std::uint32_t k) {
    if (k == 0 || k > kMaxPartitionWidth) throw RangeError("tile: k must be in [1, 64]");
    const std::size_t parts = (A.cols() + k - 1) / k;
    if (j >= parts)
        throw RangeError("tile: partition " + std::to_string(j) + " out of range (" +
                         std::to_string(parts) + " partitions)");
    BitMatrix out(A.rows(), k);
    for (std::size_t r = 0; r < A.rows(); ++r) out.set_segment(r, 0, k, A.segment(r, j * k, k));
    return out;
}

double density(const BitMatrix& A) {
    if (A.empty()) throw RangeError("density of an empty matrix");
    return static_cast<double>(A.popcount()) /
           (static_cast<double>(A.rows()) * static_cast<double>(A.cols()));
}

} // namespace phi
