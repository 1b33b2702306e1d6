#include "phi/calibration.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "phi/error.hpp"

namespace phi {

PatternSet::PatternSet(std::uint32_t k, std::vector<std::uint64_t> patterns)
        : k_(k), patterns_(std::move(patterns)) {
    if (k < 2 || k > kMaxPartitionWidth)
        throw RangeError("pattern length must be in [2, 64], got " + std::to_string(k));
    if (patterns_.size() > std::numeric_limits<PatternId>::max())
        throw RangeError("too many patterns for a 16-bit ID");
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
        const auto p = patterns_[i];
        if (p & ~low_mask(k))
            throw RangeError("pattern " + std::to_string(i + 1) + " has bits beyond k");
        if (popcount64(p) < 2)
            throw RangeError("pattern " + std::to_string(i + 1) + " is all-zero or one-hot");
    }
}

void CalibrationConfig::validate() const {
    if (q < 1 || q > std::numeric_limits<PatternId>::max())
        throw RangeError("q must be in [1, 65535]");
    if (max_iters < 1) throw RangeError("max_iters must be at least 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw RangeError("sample_fraction must be in (0, 1]");
}

std::uint32_t hamming(const BinaryVector& a, const BinaryVector& b) {
    if (a.length != b.length)
        throw ShapeError("hamming: length mismatch (" + std::to_string(a.length) + " vs " +
                         std::to_string(b.length) + ")");
    return hamming_bits(a.bits & low_mask(a.length), b.bits & low_mask(b.length));
}

std::vector<std::uint64_t> filter_rows(std::span<const std::uint64_t> rows) {
    std::vector<std::uint64_t> out;
    out.reserve(rows.size());
    for (auto r : rows)
        if (popcount64(r) >= 2) out.push_back(r);
    return out;
}

std::uint64_t clustering_cost(std::span<const std::uint64_t> rows,
                              std::span<const std::uint64_t> centers) {
    std::uint64_t cost = 0;
    for (auto r : rows) {
        std::uint32_t best = popcount64(r);
        if (!centers.empty()) {
            best = std::numeric_limits<std::uint32_t>::max();
            for (auto c : centers) best = std::min(best, hamming_bits(r, c));
        }
        cost += best;
    }
    return cost;
}

namespace {

// Distinct row values with multiplicities; first_seen orders ties between
// equally distant values by where they first appear in the input.
struct WeightedRows {
    std::vector<std::uint64_t> value;
    std::vector<std::uint32_t> weight;
    std::vector<std::size_t> first_seen;
};

WeightedRows collapse(std::span<const std::uint64_t> rows) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
    WeightedRows w;
    for (auto i : order) {
        if (!w.value.empty() && w.value.back() == rows[i]) {
            ++w.weight.back();
            continue;
        }
        w.value.push_back(rows[i]);
        w.weight.push_back(1);
        w.first_seen.push_back(i);
    }
    return w;
}

std::vector<std::uint64_t> init_uniform(const WeightedRows& data, std::size_t count,
                                        std::mt19937_64& rng) {
    std::vector<std::uint64_t> pool = data.value;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

// k-means++ seeding on Hamming distance, weighted by row multiplicity.
std::vector<std::uint64_t> init_plus_plus(const WeightedRows& data, std::size_t count,
                                          std::mt19937_64& rng) {
    const std::size_t n = data.value.size();
    std::vector<std::uint64_t> centers;
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    std::discrete_distribution<std::size_t> first(data.weight.begin(), data.weight.end());
    std::size_t next = first(rng);
    while (centers.size() < count) {
        centers.push_back(data.value[next]);
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = hamming_bits(data.value[i], data.value[next]);
            d2[i] = std::min(d2[i], d * d);
            total += d2[i] * data.weight[i];
        }
        if (centers.size() == count || total <= 0) break;
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        next = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i] * data.weight[i];
            if (target < 0 && d2[i] > 0) {
                next = i;
                break;
            }
        }
        if (d2[next] <= 0) break;
    }
    return centers;
}

bool degenerate(std::uint64_t c) { return popcount64(c) < 2; }

} // namespace

ClusterResult kmeans_binary(std::span<const std::uint64_t> rows, std::uint32_t k,
                            const CalibrationConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    if (k < 2 || k > kMaxPartitionWidth) throw RangeError("kmeans_binary: k must be in [2, 64]");
    if (rows.empty()) throw RangeError("kmeans_binary: no rows to cluster");

    const WeightedRows data = collapse(rows);
    const std::size_t n = data.value.size();
    const std::size_t count = std::min<std::size_t>(cfg.q, n);

    std::vector<std::uint64_t> centers = cfg.init == CenterInit::plus_plus
                                                 ? init_plus_plus(data, count, rng)
                                                 : init_uniform(data, count, rng);
    const std::size_t C = centers.size();

    std::vector<std::uint32_t> assign(n, 0), prev(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<std::uint32_t> dist(n, 0);
    std::vector<std::uint64_t> ones(C * k);
    std::vector<std::uint64_t> members(C);

    ClusterResult result;
    bool repaired = false;
    for (std::uint32_t it = 0; it < cfg.max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
            std::uint32_t arg = 0;
            for (std::size_t c = 0; c < C; ++c) {
                const auto d = hamming_bits(data.value[i], centers[c]);
                if (d < best) {
                    best = d;
                    arg = static_cast<std::uint32_t>(c);
                }
            }
            assign[i] = arg;
            dist[i] = best;
        }
        result.iterations = it + 1;
        if (!repaired && assign == prev) break;
        prev = assign;

        std::fill(ones.begin(), ones.end(), 0);
        std::fill(members.begin(), members.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = assign[i];
            const auto w = data.weight[i];
            members[c] += w;
            std::uint64_t bits = data.value[i];
            while (bits) {
                ones[c * k + static_cast<std::size_t>(std::countr_zero(bits))] += w;
                bits &= bits - 1;
            }
        }

        std::vector<bool> needs_seed(C, false);
        for (std::size_t c = 0; c < C; ++c) {
            if (members[c] == 0) {
                needs_seed[c] = true;
                continue;
            }
            std::uint64_t center = 0;
            for (std::uint32_t b = 0; b < k; ++b)
                if (2 * ones[c * k + b] >= members[c]) center |= std::uint64_t{1} << b;
            centers[c] = center;
        }
        std::unordered_set<std::uint64_t> taken;
        for (std::size_t c = 0; c < C; ++c) {
            if (needs_seed[c]) continue;
            if (degenerate(centers[c]) || !taken.insert(centers[c]).second) needs_seed[c] = true;
        }

        repaired = std::find(needs_seed.begin(), needs_seed.end(), true) != needs_seed.end();
        if (repaired) {
            // Farthest rows first; earlier first occurrence wins ties.
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (dist[a] != dist[b]) return dist[a] > dist[b];
                return data.first_seen[a] < data.first_seen[b];
            });
            std::size_t cursor = 0;
            for (std::size_t c = 0; c < C; ++c) {
                if (!needs_seed[c]) continue;
                while (cursor < n && taken.count(data.value[order[cursor]])) ++cursor;
                if (cursor == n) break;
                centers[c] = data.value[order[cursor]];
                taken.insert(centers[c]);
                ++cursor;
            }
        }
    }

    std::vector<std::uint64_t> final_centers;
    std::unordered_set<std::uint64_t> seen;
    for (auto c : centers)
        if (!degenerate(c) && seen.insert(c).second) final_centers.push_back(c);

    result.short_of_q = final_centers.size() < cfg.q;
    result.cost = clustering_cost(rows, final_centers);
    result.patterns = PatternSet(k, std::move(final_centers));
    return result;
}

std::mt19937_64 partition_rng(std::uint64_t seed, std::size_t partition) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(partition),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(partition) >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

bool Calibration::any_short() const {
    return std::any_of(partitions.begin(), partitions.end(),
                       [](const PartitionCalibration& p) { return p.result.short_of_q; });
}

Calibration calibrate(const BitMatrix& samples, const TileSpec& spec,
                      const CalibrationConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (samples.empty()) throw RangeError("calibrate: empty sample matrix");

    const std::size_t M = samples.rows();
    const std::size_t P = spec.partitions(samples.cols());
    const auto take = std::clamp<std::size_t>(
            static_cast<std::size_t>(cfg.sample_fraction * static_cast<double>(M) + 0.5), 1, M);

    Calibration out;
    out.k = spec.k;
    out.sets.resize(P);
    out.partitions.resize(P);
    std::vector<std::size_t> index(M);
    for (std::size_t j = 0; j < P; ++j) {
        auto rng = partition_rng(cfg.seed, j);
        std::iota(index.begin(), index.end(), std::size_t{0});
        if (take < M) {
            for (std::size_t i = 0; i < take; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, M - 1);
                std::swap(index[i], index[pick(rng)]);
            }
            std::sort(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(take));
        }
        std::vector<std::uint64_t> rows;
        rows.reserve(take);
        for (std::size_t i = 0; i < take; ++i)
            rows.push_back(samples.segment(index[i], j * spec.k, spec.k));
        const auto usable = filter_rows(rows);

        auto& part = out.partitions[j];
        part.sampled_rows = take;
        part.usable_rows = usable.size();
        if (usable.empty()) {
            part.result.patterns = PatternSet(spec.k, {});
            part.result.short_of_q = true;
        } else {
            part.result = kmeans_binary(usable, spec.k, cfg, rng);
        }
        out.sets[j] = part.result.patterns;
    }
    return out;
}

} // namespace phi
