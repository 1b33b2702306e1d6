#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phi/binmat.hpp"

namespace phi {

enum class UnitKind : std::uint8_t { nonzero = 0, psum = 1 };

/// One slot of a pack. For nonzeros, index is the column within the
/// partition and value is +1/-1. For partial sums, index is the position of
/// the partial sum among those in the pack and value is always +1.
struct Unit {
    UnitKind kind = UnitKind::nonzero;
    std::uint8_t index = 0;
    std::int8_t value = 1;

    friend bool operator==(const Unit&, const Unit&) = default;
};

/// A compressed Level 2 row segment (one row, one partition).
struct CompressedRow {
    std::uint32_t row = 0;
    std::uint32_t partition = 0;
    std::vector<Unit> units;

    bool has_psum() const;
};

struct RowSlot {
    std::uint32_t row = 0;
    std::uint8_t units = 0;

    friend bool operator==(const RowSlot&, const RowSlot&) = default;
};

inline constexpr std::uint32_t kPackCapacity = 8;

/// Fixed-capacity container fed to the 8-channel adder tree in one cycle.
/// Units are stored row by row in row_meta order.
struct Pack {
    std::vector<Unit> units;
    std::vector<RowSlot> rows;

    std::size_t size() const { return units.size(); }
};

struct PackerConfig {
    std::uint32_t window_count = 4;
    std::uint32_t bank_count = 8;
    std::uint32_t capacity = kPackCapacity;

    void validate() const;
};

/// Nonzero columns of a Level 2 segment as (index, sign) units, or nullopt
/// for an all-zero segment.
std::optional<CompressedRow> compress_row(std::uint64_t pos_mask, std::uint64_t neg_mask,
                                          std::uint32_t row, std::uint32_t partition);

/// Appends the partial-sum unit for partitions after the first.
CompressedRow attach_psum(CompressedRow row);

/// Splits a row whose unit count exceeds capacity into logical rows sharing
/// the row index; the psum unit (if any) goes with the last piece.
std::vector<CompressedRow> split_oversized(CompressedRow row, std::uint32_t capacity);

inline std::uint32_t psum_bank(std::uint32_t row, const PackerConfig& cfg) {
    return row % cfg.bank_count;
}

/// Streaming packer with several open windows. Each incoming row goes to the
/// fullest window with enough free units and no psum-bank conflict; if none
/// accepts, the fullest window is emitted and reused.
class Packer {
public:
    explicit Packer(PackerConfig cfg);

    void push(CompressedRow row);
    /// Emits every non-empty window.
    void finish();

    std::vector<Pack>& packs() { return out_; }
    const std::vector<Pack>& packs() const { return out_; }
    std::size_t open_units() const;

private:
    bool accepts(const Pack& w, const CompressedRow& row) const;
    void place(Pack& w, const CompressedRow& row);
    void emit(Pack& w);

    PackerConfig cfg_;
    std::vector<Pack> windows_;
    std::vector<Pack> out_;
};

/// Packs an ordered stream; oversized rows are split first.
std::vector<Pack> pack_stream(const std::vector<CompressedRow>& rows, const PackerConfig& cfg);

/// units / (packs * capacity); 0 for an empty stream.
double pack_utilization(const std::vector<Pack>& packs, std::uint32_t capacity = kPackCapacity);

/// Compressed rows (psum attached) of one partition, rows [row0, row1).
std::vector<CompressedRow> compress_partition(const TernaryMatrix& l2, std::size_t partition,
                                              std::uint32_t k, std::size_t row0,
                                              std::size_t row1);

} // namespace phi
