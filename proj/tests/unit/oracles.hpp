#pragma once

// Independent reference implementations. They only use per-bit accessors
// so they share no code paths with the word-level library routines.

#include <cstdint>
#include <limits>
#include <vector>

#include <phi/phi.hpp>

namespace oracle {

inline int bit(std::uint64_t v, unsigned i) { return static_cast<int>((v >> i) & 1u); }

inline unsigned hamming(std::uint64_t a, std::uint64_t b, unsigned k) {
    unsigned d = 0;
    for (unsigned i = 0; i < k; ++i) d += bit(a, i) != bit(b, i);
    return d;
}

inline unsigned ones(std::uint64_t a, unsigned k) { return hamming(a, 0, k); }

/// min(popcount(row), min_p hamming(row, p)).
inline unsigned best_l2(std::uint64_t row, const phi::PatternSet& set, unsigned k) {
    unsigned best = ones(row, k);
    for (auto p : set.patterns()) best = std::min(best, hamming(row, p, k));
    return best;
}

inline std::vector<std::vector<std::int64_t>> matmul(const phi::BitMatrix& A,
                                                     const phi::WeightMatrix& W) {
    std::vector<std::vector<std::int64_t>> out(A.rows(), std::vector<std::int64_t>(W.cols(), 0));
    for (std::size_t n = 0; n < W.cols(); ++n)
        for (std::size_t r = 0; r < A.rows(); ++r)
            for (std::size_t c = 0; c < A.cols(); ++c)
                out[r][n] += A.get(r, c) ? std::int64_t{W.at(c, n)} : 0;
    return out;
}

inline bool same(const phi::OutputMatrix& got, const std::vector<std::vector<std::int64_t>>& want) {
    if (got.rows() != want.size()) return false;
    for (std::size_t r = 0; r < got.rows(); ++r) {
        if (got.cols() != want[r].size()) return false;
        for (std::size_t n = 0; n < got.cols(); ++n)
            if (got.at(r, n) != want[r][n]) return false;
    }
    return true;
}

/// Sum over rows and partitions of the capped Hamming distance, bit by bit.
inline std::uint64_t l2_nnz(const phi::BitMatrix& A, const std::vector<phi::PatternSet>& sets,
                            unsigned k) {
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < A.rows(); ++r) {
        for (std::size_t j = 0; j < sets.size(); ++j) {
            std::uint64_t row = 0;
            for (unsigned c = 0; c < k && j * k + c < A.cols(); ++c)
                row |= std::uint64_t(A.get(r, j * k + c)) << c;
            unsigned width = static_cast<unsigned>(std::min<std::size_t>(k, A.cols() - j * k));
            unsigned best = ones(row, width);
            for (auto p : sets[j].patterns()) {
                std::uint64_t masked = p & ((width >= 64) ? ~0ull : ((1ull << width) - 1));
                best = std::min(best, hamming(row, masked, width));
            }
            total += best;
        }
    }
    return total;
}

}  // namespace oracle
