#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace phi {

/// Largest supported partition width; one tile row fits in a machine word.
inline constexpr std::uint32_t kMaxPartitionWidth = 64;

/// Row-major, bit-packed binary matrix. Column c of a row lives in byte
/// c / 8 at bit c % 8 (LSB first); every row is padded to a whole byte and
/// padding bits are always zero.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t row_stride() const { return stride_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    bool get(std::size_t r, std::size_t c) const {
        return (bits_[r * stride_ + c / 8] >> (c % 8)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        auto& byte = bits_[r * stride_ + c / 8];
        const auto mask = static_cast<std::uint8_t>(1u << (c % 8));
        byte = v ? static_cast<std::uint8_t>(byte | mask)
                 : static_cast<std::uint8_t>(byte & ~mask);
    }

    std::span<const std::uint8_t> row_bytes(std::size_t r) const {
        return {bits_.data() + r * stride_, stride_};
    }
    std::span<const std::uint8_t> bytes() const { return bits_; }

    /// Copies raw row bytes in; padding bits of the input are cleared.
    void assign_row_bytes(std::size_t r, std::span<const std::uint8_t> src);

    /// Bits [col0, col0 + width) of row r as an integer (bit i = column
    /// col0 + i). Columns at or beyond cols() read as zero. width <= 64.
    std::uint64_t segment(std::size_t r, std::size_t col0, std::uint32_t width) const;

    /// Writes bits [col0, col0 + width) of row r; bits past cols() are dropped.
    void set_segment(std::size_t r, std::size_t col0, std::uint32_t width,
                     std::uint64_t value);

    std::size_t row_popcount(std::size_t r) const;
    std::size_t popcount() const;

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// M x K matrix over {-1, 0, +1}, held as two disjoint bit planes.
class TernaryMatrix {
public:
    TernaryMatrix() = default;
    TernaryMatrix(std::size_t rows, std::size_t cols) : pos_(rows, cols), neg_(rows, cols) {}

    std::size_t rows() const { return pos_.rows(); }
    std::size_t cols() const { return pos_.cols(); }

    int get(std::size_t r, std::size_t c) const {
        return pos_.get(r, c) ? 1 : (neg_.get(r, c) ? -1 : 0);
    }
    void set(std::size_t r, std::size_t c, int v);

    const BitMatrix& positive() const { return pos_; }
    const BitMatrix& negative() const { return neg_; }

    /// Writes a k-wide segment from two disjoint masks.
    void set_segment(std::size_t r, std::size_t col0, std::uint32_t width,
                     std::uint64_t pos_mask, std::uint64_t neg_mask);

    std::size_t positive_count() const { return pos_.popcount(); }
    std::size_t negative_count() const { return neg_.popcount(); }
    std::size_t nnz() const { return positive_count() + negative_count(); }

    /// nnz / (rows * cols); throws RangeError on an empty matrix.
    double density() const;

    friend bool operator==(const TernaryMatrix&, const TernaryMatrix&) = default;

private:
    BitMatrix pos_;
    BitMatrix neg_;
};

/// Tiling parameters. k is the partition (K-tile) width; m and n are the
/// output tile height and width used by the scheduler.
struct TileSpec {
    std::uint32_t k = 16;
    std::uint32_t m = 256;
    std::uint32_t n = 32;

    /// ceil(K / k).
    std::size_t partitions(std::size_t K) const { return (K + k - 1) / k; }
    void validate() const;
};

inline std::uint32_t popcount64(std::uint64_t x) {
    return static_cast<std::uint32_t>(std::popcount(x));
}

inline std::uint64_t low_mask(std::uint32_t width) {
    return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
}

/// Columns [j*k, (j+1)*k) of A, zero padded on the right past K.
BitMatrix tile(const BitMatrix& A, std::size_t j, std::uint32_t k);

/// popcount(A) / (rows * cols); throws RangeError for an empty matrix.
double density(const BitMatrix& A);

} // namespace phi
