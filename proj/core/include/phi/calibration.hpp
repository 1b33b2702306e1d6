#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phi/binmat.hpp"

namespace phi {

/// Pattern identifier. 0 means "no pattern"; stored patterns use 1..q.
using PatternId = std::uint16_t;

/// q binary patterns of length k for one partition. Pattern IDs are dense
/// and 1-based; no stored pattern is all-zero or one-hot.
class PatternSet {
public:
    PatternSet() = default;
    /// Throws RangeError if a pattern has popcount < 2 or bits beyond k.
    PatternSet(std::uint32_t k, std::vector<std::uint64_t> patterns);

    std::uint32_t k() const { return k_; }
    std::size_t size() const { return patterns_.size(); }
    bool empty() const { return patterns_.empty(); }

    /// Pattern bits for a 1-based ID.
    std::uint64_t pattern(PatternId id) const { return patterns_[id - 1]; }
    std::span<const std::uint64_t> patterns() const { return patterns_; }

    friend bool operator==(const PatternSet&, const PatternSet&) = default;

private:
    std::uint32_t k_ = 0;
    std::vector<std::uint64_t> patterns_;
};

enum class CenterInit {
    uniform,    // q distinct data rows, uniformly
    plus_plus,  // Hamming-distance k-means++ seeding
};

struct CalibrationConfig {
    std::uint32_t q = 128;
    std::uint32_t max_iters = 25;
    std::uint64_t seed = 0;
    double sample_fraction = 0.1;
    CenterInit init = CenterInit::uniform;

    void validate() const;
};

/// A length-k binary vector (k <= 64).
struct BinaryVector {
    std::uint64_t bits = 0;
    std::uint32_t length = 0;
};

/// Number of differing positions; throws ShapeError on a length mismatch.
std::uint32_t hamming(const BinaryVector& a, const BinaryVector& b);

inline std::uint32_t hamming_bits(std::uint64_t a, std::uint64_t b) {
    return popcount64(a ^ b);
}

/// Keeps rows with popcount >= 2, preserving order.
std::vector<std::uint64_t> filter_rows(std::span<const std::uint64_t> rows);

struct ClusterResult {
    PatternSet patterns;
    /// Sum over input rows of the Hamming distance to the nearest emitted center.
    std::uint64_t cost = 0;
    std::uint32_t iterations = 0;
    /// Fewer than q usable centers survived (too few distinct rows, or
    /// degenerate centers that could not be repaired).
    bool short_of_q = false;
};

/// Binary k-means under Hamming distance: nearest-center assignment
/// (lowest index on ties), per-cluster bitwise mean rounded to {0,1}
/// (0.5 rounds up). Empty, all-zero, one-hot and duplicate centers are
/// reseeded from the rows farthest from their centers; whatever is still
/// degenerate after the last iteration is dropped. rows must already be
/// filtered and non-empty.
ClusterResult kmeans_binary(std::span<const std::uint64_t> rows, std::uint32_t k,
                            const CalibrationConfig& cfg, std::mt19937_64& rng);

/// Sum over rows of min Hamming distance to any pattern (rows with no
/// patterns available contribute their popcount).
std::uint64_t clustering_cost(std::span<const std::uint64_t> rows,
                              std::span<const std::uint64_t> centers);

struct PartitionCalibration {
    ClusterResult result;
    std::size_t sampled_rows = 0;
    std::size_t usable_rows = 0;
};

struct Calibration {
    std::uint32_t k = 0;
    std::vector<PatternSet> sets;
    std::vector<PartitionCalibration> partitions;

    bool any_short() const;
};

/// Independent k-means per K-partition of the sample matrix. Each partition
/// draws its own row sample and RNG stream from (seed, partition index), so
/// the result does not depend on evaluation order.
Calibration calibrate(const BitMatrix& samples, const TileSpec& spec,
                      const CalibrationConfig& cfg);

/// Deterministic per-partition RNG stream.
std::mt19937_64 partition_rng(std::uint64_t seed, std::size_t partition);

} // namespace phi
