#include "phi/corpus.hpp"

#include <random>

#include "phi/error.hpp"

namespace phi {

BitMatrix random_bitmatrix(std::size_t rows, std::size_t cols, double density,
                           std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0)) throw RangeError("density must be in [0, 1]");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(density);
    BitMatrix A(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (bit(rng)) A.set(r, c, true);
    return A;
}

WeightMatrix random_weights(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            std::int32_t lo, std::int32_t hi) {
    if (lo > hi) throw RangeError("random_weights: lo > hi");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int32_t> dist(lo, hi);
    WeightMatrix W(rows, cols);
    for (auto& w : W.data()) w = dist(rng);
    return W;
}

} // namespace phi
