#include "phi/packing.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "phi/error.hpp"

namespace phi {

bool CompressedRow::has_psum() const {
    return std::any_of(units.begin(), units.end(),
                       [](const Unit& u) { return u.kind == UnitKind::psum; });
}

void PackerConfig::validate() const {
    if (window_count < 1) throw ConfigError("packer: window_count must be at least 1");
    if (bank_count < 1) throw ConfigError("packer: bank_count must be at least 1");
    if (capacity < 2 || capacity > 255) throw ConfigError("packer: capacity must be in [2, 255]");
}

std::optional<CompressedRow> compress_row(std::uint64_t pos_mask, std::uint64_t neg_mask,
                                          std::uint32_t row, std::uint32_t partition) {
    if (pos_mask & neg_mask) throw RangeError("compress_row: overlapping +1 and -1 masks");
    const std::uint64_t any = pos_mask | neg_mask;
    if (any == 0) return std::nullopt;
    CompressedRow out{row, partition, {}};
    out.units.reserve(static_cast<std::size_t>(std::popcount(any)));
    for (std::uint64_t bits = any; bits; bits &= bits - 1) {
        const auto c = static_cast<unsigned>(std::countr_zero(bits));
        out.units.push_back({UnitKind::nonzero, static_cast<std::uint8_t>(c),
                             static_cast<std::int8_t>((pos_mask >> c) & 1u ? 1 : -1)});
    }
    return out;
}

CompressedRow attach_psum(CompressedRow row) {
    if (row.partition > 0 && !row.has_psum())
        row.units.push_back({UnitKind::psum, 0, 1});
    return row;
}

std::vector<CompressedRow> split_oversized(CompressedRow row, std::uint32_t capacity) {
    if (capacity == 0) throw RangeError("split_oversized: zero capacity");
    if (row.units.size() <= capacity) return {std::move(row)};
    std::vector<Unit> nonzeros, psums;
    for (const auto& u : row.units) (u.kind == UnitKind::psum ? psums : nonzeros).push_back(u);
    std::vector<CompressedRow> out;
    std::size_t at = 0;
    while (at < nonzeros.size()) {
        CompressedRow piece{row.row, row.partition, {}};
        const std::size_t take = std::min<std::size_t>(capacity, nonzeros.size() - at);
        piece.units.assign(nonzeros.begin() + static_cast<std::ptrdiff_t>(at),
                           nonzeros.begin() + static_cast<std::ptrdiff_t>(at + take));
        at += take;
        out.push_back(std::move(piece));
    }
    for (const auto& p : psums) {
        if (out.back().units.size() >= capacity) out.push_back({row.row, row.partition, {}});
        out.back().units.push_back(p);
    }
    return out;
}

Packer::Packer(PackerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    windows_.resize(cfg_.window_count);
}

bool Packer::accepts(const Pack& w, const CompressedRow& row) const {
    if (w.units.size() + row.units.size() > cfg_.capacity) return false;
    const auto bank = psum_bank(row.row, cfg_);
    return std::none_of(w.rows.begin(), w.rows.end(),
                        [&](const RowSlot& s) { return psum_bank(s.row, cfg_) == bank; });
}

void Packer::place(Pack& w, const CompressedRow& row) {
    std::uint8_t psum_slot = 0;
    for (const auto& u : w.units)
        if (u.kind == UnitKind::psum) ++psum_slot;
    for (auto u : row.units) {
        if (u.kind == UnitKind::psum) u.index = psum_slot++;
        w.units.push_back(u);
    }
    w.rows.push_back({row.row, static_cast<std::uint8_t>(row.units.size())});
}

void Packer::emit(Pack& w) {
    if (w.units.empty()) return;
    out_.push_back(std::move(w));
    w = Pack{};
}

void Packer::push(CompressedRow row) {
    if (row.units.empty()) return;
    for (auto& piece : split_oversized(std::move(row), cfg_.capacity)) {
        Pack* best = nullptr;
        for (auto& w : windows_)
            if (accepts(w, piece) && (best == nullptr || w.units.size() > best->units.size()))
                best = &w;
        if (best == nullptr) {
            best = &windows_.front();
            for (auto& w : windows_)
                if (w.units.size() > best->units.size()) best = &w;
            emit(*best);
        }
        place(*best, piece);
    }
}

void Packer::finish() {
    for (auto& w : windows_) emit(w);
}

std::size_t Packer::open_units() const {
    std::size_t n = 0;
    for (const auto& w : windows_) n += w.units.size();
    return n;
}

std::vector<Pack> pack_stream(const std::vector<CompressedRow>& rows, const PackerConfig& cfg) {
    Packer p(cfg);
    for (const auto& r : rows) p.push(r);
    p.finish();
    return std::move(p.packs());
}

double pack_utilization(const std::vector<Pack>& packs, std::uint32_t capacity) {
    if (packs.empty()) return 0.0;
    std::size_t units = 0;
    for (const auto& p : packs) units += p.units.size();
    return static_cast<double>(units) /
           (static_cast<double>(packs.size()) * static_cast<double>(capacity));
}

std::vector<CompressedRow> compress_partition(const TernaryMatrix& l2, std::size_t partition,
                                              std::uint32_t k, std::size_t row0,
                                              std::size_t row1) {
    if (row1 > l2.rows() || row0 > row1) throw RangeError("compress_partition: bad row range");
    std::vector<CompressedRow> out;
    const std::size_t col0 = partition * k;
    for (std::size_t r = row0; r < row1; ++r) {
        auto c = compress_row(l2.positive().segment(r, col0, k), l2.negative().segment(r, col0, k),
                              static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(partition));
        if (c) out.push_back(attach_psum(std::move(*c)));
    }
    return out;
}

} // namespace phi
