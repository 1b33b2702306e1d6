#pragma once

#include <cstdint>

#include "phi/binmat.hpp"
#include "phi/compute.hpp"

namespace phi {

/// Seeded Bernoulli(density) matrix.
BitMatrix random_bitmatrix(std::size_t rows, std::size_t cols, double density,
                           std::uint64_t seed);

/// Seeded uniform integer weights in [lo, hi].
WeightMatrix random_weights(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            std::int32_t lo = -128, std::int32_t hi = 127);

} // namespace phi
