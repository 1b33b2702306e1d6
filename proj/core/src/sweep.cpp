#include "phi/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "phi/decompose.hpp"
#include "phi/error.hpp"

namespace phi {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

std::uint64_t parse_value(std::string_view v, bool size) {
    std::uint64_t mult = 1;
    if (size && !v.empty()) {
        const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(v.back())));
        if (last == 'B' && v.size() > 1) v.remove_suffix(1);
        const char unit = static_cast<char>(std::toupper(static_cast<unsigned char>(v.back())));
        if (unit == 'K') mult = 1024;
        if (unit == 'M') mult = 1024 * 1024;
        if (mult != 1) v.remove_suffix(1);
    }
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || end != v.data() + v.size() || out == 0)
        throw ConfigError("sweep grid: bad value '" + std::string(v) + "'");
    return out * mult;
}

} // namespace

std::size_t SweepGrid::size() const {
    return std::max<std::size_t>(1, k.size()) * std::max<std::size_t>(1, q.size()) *
           std::max<std::size_t>(1, buffer_bytes.size());
}

SweepGrid parse_sweep_grid(std::string_view text) {
    SweepGrid grid;
    while (!text.empty()) {
        const auto semi = text.find(';');
        const auto axis = trim(text.substr(0, semi));
        text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
        if (axis.empty()) continue;
        const auto eq = axis.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("sweep grid: expected axis=values, got '" + std::string(axis) + "'");
        const auto name = trim(axis.substr(0, eq));
        auto values = axis.substr(eq + 1);
        std::vector<std::uint64_t> parsed;
        const bool size = name == "buffer";
        while (!values.empty()) {
            const auto comma = values.find(',');
            const auto v = trim(values.substr(0, comma));
            values = comma == std::string_view::npos ? std::string_view{} : values.substr(comma + 1);
            if (!v.empty()) parsed.push_back(parse_value(v, size));
        }
        if (name == "k") {
            for (auto v : parsed) {
                if (v < 2 || v > kMaxPartitionWidth) throw ConfigError("sweep grid: k out of range");
                grid.k.push_back(static_cast<std::uint32_t>(v));
            }
        } else if (name == "q") {
            for (auto v : parsed) {
                if (v > 65535) throw ConfigError("sweep grid: q out of range");
                grid.q.push_back(static_cast<std::uint32_t>(v));
            }
        } else if (size) {
            grid.buffer_bytes = parsed;
        } else {
            throw ConfigError("sweep grid: unknown axis '" + std::string(name) + "'");
        }
    }
    if (grid.k.empty() && grid.q.empty() && grid.buffer_bytes.empty())
        throw ConfigError("sweep grid is empty");
    return grid;
}

std::vector<SweepRow> run_sweep(const BitMatrix& calibration, const BitMatrix& evaluation,
                                const WeightMatrix& weights, const ArchConfig& base,
                                const CalibrationConfig& calib, const SweepGrid& grid) {
    const std::vector<std::uint32_t> ks = grid.k.empty() ? std::vector{base.tile.k} : grid.k;
    const std::vector<std::uint32_t> qs = grid.q.empty() ? std::vector{base.q} : grid.q;
    const std::vector<std::uint64_t> bufs =
            grid.buffer_bytes.empty() ? std::vector{base.total_buffer_bytes()} : grid.buffer_bytes;

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (auto k : ks) {
        for (auto q : qs) {
            ArchConfig cfg = base;
            cfg.tile.k = k;
            cfg.q = q;
            CalibrationConfig cc = calib;
            cc.q = q;
            const auto cal = calibrate(calibration, cfg.tile, cc);
            const auto dec = decompose(evaluation, cal.sets, cfg.tile);
            for (auto b : bufs) {
                ArchConfig point = cfg;
                point.scale_buffers_to(b);
                rows.push_back({{k, q, b}, sim_layer(evaluation, dec, weights, cal.sets, point)});
            }
        }
    }
    return rows;
}

std::optional<std::uint64_t> dram_plateau(const std::vector<SweepRow>& rows, std::uint32_t k,
                                          std::uint32_t q) {
    std::map<std::uint64_t, std::uint64_t> by_buffer;
    for (const auto& r : rows)
        if (r.point.k == k && r.point.q == q)
            by_buffer[r.point.buffer_bytes] = r.report.dram.total();
    if (by_buffer.size() < 2) return std::nullopt;
    auto it = std::prev(by_buffer.end());
    const auto last = it->second;
    std::optional<std::uint64_t> plateau;
    while (true) {
        if (it == by_buffer.begin()) break;
        auto prev = std::prev(it);
        if (prev->second != last) break;
        plateau = prev->first;
        it = prev;
    }
    return plateau;
}

std::uint32_t best_k_by_l2_density(const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw RangeError("best_k_by_l2_density: no rows");
    const SweepRow* best = &rows.front();
    for (const auto& r : rows)
        if (r.report.metrics.l2_density() < best->report.metrics.l2_density()) best = &r;
    return best->point.k;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os.precision(10);
    os << "k,q,buffer_bytes,bit_density,l2_density,speedup_over_bit,total_cycles,"
          "compute_cycles,datapath_cycles,l1_cycles,l2_cycles,packs,pwp_bytes_with_prefetch,"
          "pwp_bytes_without_prefetch,dram_bytes,energy_pj\n";
    for (const auto& r : rows) {
        const auto& s = r.report;
        os << r.point.k << ',' << r.point.q << ',' << r.point.buffer_bytes << ','
           << s.metrics.bit_density << ',' << s.metrics.l2_density() << ','
           << s.metrics.speedup_over_bit << ',' << s.total_cycles << ',' << s.compute_cycles << ','
           << s.datapath_cycles << ','
           << s.stages.l1 << ',' << s.stages.l2 << ',' << s.packs << ','
           << s.dram.pwp_with_prefetch << ',' << s.dram.pwp_without_prefetch << ','
           << s.dram.total() << ',' << s.energy.total() << '\n';
    }
    return os.str();
}

} // namespace phi
