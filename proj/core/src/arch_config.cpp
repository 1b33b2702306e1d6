#include "phi/arch_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <variant>
#include <vector>

#include "phi/error.hpp"

namespace phi {

namespace {

using Field = std::variant<std::uint32_t ArchConfig::*, std::uint64_t ArchConfig::*,
                           double ArchConfig::*, bool ArchConfig::*,
                           std::uint32_t TileSpec::*, std::uint32_t PackerConfig::*,
                           double EnergyTable::*>;

struct Key {
    const char* name;
    Field field;
    bool size = false;  // accepts K/M suffixes
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
            {"tile_k", &TileSpec::k},
            {"tile_m", &TileSpec::m},
            {"tile_n", &TileSpec::n},
            {"q", &ArchConfig::q},
            {"pack_buffer", &ArchConfig::pack_buffer_bytes, true},
            {"weight_buffer", &ArchConfig::weight_buffer_bytes, true},
            {"pwp_buffer", &ArchConfig::pwp_buffer_bytes, true},
            {"index_buffer", &ArchConfig::index_buffer_bytes, true},
            {"psum_buffer", &ArchConfig::psum_buffer_bytes, true},
            {"adder_channels", &ArchConfig::adder_channels},
            {"l1_scan_width", &ArchConfig::l1_scan_width},
            {"l1_pwp_per_cycle", &ArchConfig::l1_pwp_per_cycle},
            {"l2_pipeline_depth", &ArchConfig::l2_pipeline_depth},
            {"weight_bytes", &ArchConfig::weight_bytes},
            {"unit_bytes", &ArchConfig::unit_bytes},
            {"pack_meta_bytes", &ArchConfig::pack_meta_bytes},
            {"dram_bytes_per_cycle", &ArchConfig::dram_bytes_per_cycle},
            {"frequency_mhz", &ArchConfig::frequency_mhz},
            {"window_count", &PackerConfig::window_count},
            {"bank_count", &PackerConfig::bank_count},
            {"pack_capacity", &PackerConfig::capacity},
            {"prefetch", &ArchConfig::prefetch},
            {"energy.l1_add_pj", &EnergyTable::l1_add_pj},
            {"energy.l2_add_pj", &EnergyTable::l2_add_pj},
            {"energy.neuron_update_pj", &EnergyTable::neuron_update_pj},
            {"energy.matcher_compare_pj", &EnergyTable::matcher_compare_pj},
            {"energy.buffer_read_pj_per_byte", &EnergyTable::buffer_read_pj_per_byte},
            {"energy.buffer_write_pj_per_byte", &EnergyTable::buffer_write_pj_per_byte},
            {"energy.dram_pj_per_byte", &EnergyTable::dram_pj_per_byte},
    };
    return table;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::size_t line, std::string_view key, std::string_view value) {
    throw ConfigError("config line " + std::to_string(line) + ": bad value '" + std::string(value) +
                      "' for " + std::string(key));
}

std::uint64_t parse_uint(std::size_t line, std::string_view key, std::string_view v, bool size) {
    std::uint64_t mult = 1;
    if (size) {
        std::string upper(v);
        std::transform(upper.begin(), upper.end(), upper.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        auto strip = [&](std::string_view suffix, std::uint64_t m) {
            if (upper.size() > suffix.size() &&
                upper.compare(upper.size() - suffix.size(), suffix.size(), suffix) == 0) {
                v = trim(v.substr(0, v.size() - suffix.size()));
                upper.resize(upper.size() - suffix.size());
                mult = m;
                return true;
            }
            return false;
        };
        strip("KB", 1024) || strip("MB", 1024 * 1024) || strip("K", 1024) ||
                strip("M", 1024 * 1024) || strip("B", 1);
    }
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size() || v.empty()) bad_value(line, key, v);
    if (out > std::numeric_limits<std::uint64_t>::max() / mult) bad_value(line, key, v);
    return out * mult;
}

double parse_double(std::size_t line, std::string_view key, std::string_view v) {
    double out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size() || v.empty()) bad_value(line, key, v);
    return out;
}

bool parse_bool(std::size_t line, std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    bad_value(line, key, v);
}

std::string format_double(double d) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    (void)ec;
    return std::string(buf, end);
}

} // namespace

void ArchConfig::validate() const {
    try {
        tile.validate();
        packer.validate();
    } catch (const RangeError& e) {
        throw ConfigError(e.what());
    }
    if (q < 1 || q > 65535) throw ConfigError("q must be in [1, 65535]");
    if (pack_buffer_bytes == 0 || weight_buffer_bytes == 0 || pwp_buffer_bytes == 0 ||
        index_buffer_bytes == 0 || psum_buffer_bytes == 0)
        throw ConfigError("buffer capacities must be positive");
    if (adder_channels == 0 || l1_scan_width == 0 || l1_pwp_per_cycle == 0)
        throw ConfigError("adder_channels, l1_scan_width and l1_pwp_per_cycle must be positive");
    if (weight_bytes == 0 || unit_bytes == 0) throw ConfigError("element sizes must be positive");
    if (!(dram_bytes_per_cycle > 0)) throw ConfigError("DRAM bandwidth must be positive");
    if (!(frequency_mhz > 0)) throw ConfigError("frequency must be positive");
    const double e[] = {energy.l1_add_pj, energy.l2_add_pj, energy.neuron_update_pj,
                        energy.matcher_compare_pj, energy.buffer_read_pj_per_byte,
                        energy.buffer_write_pj_per_byte, energy.dram_pj_per_byte};
    for (double v : e)
        if (!(v >= 0)) throw ConfigError("energy table entries must be non-negative");
}

std::uint64_t ArchConfig::total_buffer_bytes() const {
    return pack_buffer_bytes + weight_buffer_bytes + pwp_buffer_bytes + index_buffer_bytes +
           psum_buffer_bytes;
}

void ArchConfig::scale_buffers_to(std::uint64_t total_bytes) {
    const double f = static_cast<double>(total_bytes) / static_cast<double>(total_buffer_bytes());
    auto scale = [f](std::uint64_t& b) {
        b = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(static_cast<double>(b) * f));
    };
    scale(pack_buffer_bytes);
    scale(weight_buffer_bytes);
    scale(pwp_buffer_bytes);
    scale(index_buffer_bytes);
    scale(psum_buffer_bytes);
}

ArchConfig parse_arch_config(std::string_view text, ArchConfig base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const Key& k) { return key == k.name; });
        if (it == table.end())
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                              std::string(key) + "'");
        std::visit(
                [&](auto member) {
                    using M = decltype(member);
                    auto narrow = [&](std::uint64_t v) {
                        if (v > std::numeric_limits<std::uint32_t>::max())
                            bad_value(line_no, key, value);
                        return static_cast<std::uint32_t>(v);
                    };
                    if constexpr (std::is_same_v<M, std::uint32_t ArchConfig::*>)
                        base.*member = narrow(parse_uint(line_no, key, value, it->size));
                    else if constexpr (std::is_same_v<M, std::uint64_t ArchConfig::*>)
                        base.*member = parse_uint(line_no, key, value, it->size);
                    else if constexpr (std::is_same_v<M, double ArchConfig::*>)
                        base.*member = parse_double(line_no, key, value);
                    else if constexpr (std::is_same_v<M, bool ArchConfig::*>)
                        base.*member = parse_bool(line_no, key, value);
                    else if constexpr (std::is_same_v<M, std::uint32_t TileSpec::*>)
                        base.tile.*member = narrow(parse_uint(line_no, key, value, false));
                    else if constexpr (std::is_same_v<M, std::uint32_t PackerConfig::*>)
                        base.packer.*member = narrow(parse_uint(line_no, key, value, false));
                    else
                        base.energy.*member = parse_double(line_no, key, value);
                },
                it->field);
    }
    base.validate();
    return base;
}

ArchConfig load_arch_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_arch_config(ss.str());
}

std::string to_config_text(const ArchConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) {
        std::string value = std::visit(
                [&](auto member) -> std::string {
                    using M = decltype(member);
                    if constexpr (std::is_same_v<M, double ArchConfig::*>)
                        return format_double(cfg.*member);
                    else if constexpr (std::is_same_v<M, bool ArchConfig::*>)
                        return cfg.*member ? "true" : "false";
                    else if constexpr (std::is_same_v<M, std::uint32_t TileSpec::*>)
                        return std::to_string(cfg.tile.*member);
                    else if constexpr (std::is_same_v<M, std::uint32_t PackerConfig::*>)
                        return std::to_string(cfg.packer.*member);
                    else if constexpr (std::is_same_v<M, double EnergyTable::*>)
                        return format_double(cfg.energy.*member);
                    else
                        return std::to_string(cfg.*member);
                },
                k.field);
        out += k.name;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

bool operator==(const EnergyTable& a, const EnergyTable& b) {
    return a.l1_add_pj == b.l1_add_pj && a.l2_add_pj == b.l2_add_pj &&
           a.neuron_update_pj == b.neuron_update_pj &&
           a.matcher_compare_pj == b.matcher_compare_pj &&
           a.buffer_read_pj_per_byte == b.buffer_read_pj_per_byte &&
           a.buffer_write_pj_per_byte == b.buffer_write_pj_per_byte &&
           a.dram_pj_per_byte == b.dram_pj_per_byte;
}

bool operator==(const ArchConfig& a, const ArchConfig& b) {
    return to_config_text(a) == to_config_text(b);
}

} // namespace phi
