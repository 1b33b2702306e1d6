#include "phi/report.hpp"

#include <cmath>

#include <json.hpp>

#include "phi/error.hpp"

namespace phi {

namespace {

using nlohmann::ordered_json;

// Infinite ratios have no JSON spelling; they are written as null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json metrics_object(const PhiMetrics& m) {
    return {{"bit_density", num(m.bit_density)},
            {"l1_density", num(m.l1_density)},
            {"l2_pos_density", num(m.l2_pos_density)},
            {"l2_neg_density", num(m.l2_neg_density)},
            {"l2_density", num(m.l2_density())},
            {"index_density", num(m.index_density)},
            {"speedup_over_bit", num(m.speedup_over_bit)},
            {"speedup_over_dense", num(m.speedup_over_dense)},
            {"total_op_speedup_over_bit", num(m.total_op_speedup_over_bit)},
            {"pwp_utilization", num(m.pwp_utilization)},
            {"bit_ones", m.bit_ones},
            {"l1_expanded_ones", m.l1_expanded_ones},
            {"l2_pos", m.l2_pos},
            {"l2_neg", m.l2_neg},
            {"index_nnz", m.index_nnz}};
}

ordered_json stages_object(const StageCycles& s) {
    return {{"preprocessor", s.preprocessor}, {"l1", s.l1}, {"l2", s.l2},
            {"neuron", s.neuron}, {"dram", s.dram}};
}

ordered_json baseline_object(const BaselineReport& b) {
    return {{"name", b.name}, {"ops", b.ops}, {"cycles", b.cycles},
            {"dram_bytes", b.dram_bytes}, {"energy_pj", num(b.energy_pj)}};
}

} // namespace

std::string metrics_json(const PhiMetrics& m) { return metrics_object(m).dump(2); }

std::string report_json(const SimReport& r, const std::string& manifest_json,
                        bool include_rounds) {
    ordered_json j;
    j["schema"] = kReportSchema;
    if (!manifest_json.empty()) {
        auto manifest = ordered_json::parse(manifest_json, nullptr, false);
        if (manifest.is_discarded() || !manifest.is_object())
            throw FormatError("report_json: manifest is not a JSON object");
        j["manifest"] = std::move(manifest);
    }
    j["shape"] = {{"M", r.M}, {"K", r.K}, {"N", r.N}};
    j["tiles"] = {{"m_tiles", r.m_tiles}, {"n_tiles", r.n_tiles}, {"k_groups", r.k_groups}};
    j["cycles"] = {{"stages", stages_object(r.stages)},
                   {"pipeline_fill", r.pipeline_fill},
                   {"compute", r.compute_cycles},
                   {"datapath", r.datapath_cycles},
                   {"total", r.total_cycles}};
    if (include_rounds) {
        auto rounds = ordered_json::array();
        for (const auto& rc : r.rounds)
            rounds.push_back({{"stages", stages_object(rc.stages)}, {"compute", rc.compute}});
        j["cycles"]["rounds"] = std::move(rounds);
    }
    j["packing"] = {{"packs", r.packs},
                    {"units", r.l2_units},
                    {"psum_units", r.ops.psum_units},
                    {"utilization", num(r.pack_utilization)}};
    j["dram_bytes"] = {{"activation_raw", r.dram.activation_raw},
                       {"activation_compact", r.dram.activation_compact},
                       {"index", r.dram.index},
                       {"weight", r.dram.weight},
                       {"pwp", r.dram.pwp},
                       {"pwp_with_prefetch", r.dram.pwp_with_prefetch},
                       {"pwp_without_prefetch", r.dram.pwp_without_prefetch},
                       {"psum_spill", r.dram.psum_spill},
                       {"output", r.dram.output},
                       {"total", r.dram.total()}};
    j["energy_pj"] = {{"l1_add", r.energy.l1_add},
                      {"l2_add", r.energy.l2_add},
                      {"neuron", r.energy.neuron},
                      {"matcher", r.energy.matcher},
                      {"buffer_read", r.energy.buffer_read},
                      {"buffer_write", r.energy.buffer_write},
                      {"dram", r.energy.dram},
                      {"total", r.energy.total()}};
    j["ops"] = {{"dense", r.ops.dense},
                {"bit_sparse", r.ops.bit_sparse},
                {"phi_l1", r.ops.phi_l1},
                {"phi_l2", r.ops.phi_l2}};
    j["metrics"] = metrics_object(r.metrics);
    j["baselines"] = {baseline_object(r.dense), baseline_object(r.bit_sparse)};
    j["speedup"] = {{"over_dense", num(r.speedup_over_dense())},
                    {"over_bit_sparse", num(r.speedup_over_bit_sparse())}};
    return j.dump(2);
}

std::string pack_trace_jsonl(const std::vector<Pack>& packs) {
    std::string out;
    for (const auto& p : packs) {
        ordered_json units = ordered_json::array(), meta = ordered_json::array();
        for (const auto& u : p.units)
            units.push_back({{"label", u.kind == UnitKind::psum ? "psum" : "nonzero"},
                             {"index", u.index},
                             {"value", u.value}});
        for (const auto& s : p.rows) meta.push_back({{"row", s.row}, {"units", s.units}});
        out += ordered_json{{"units", units}, {"row_meta", meta}}.dump();
        out += '\n';
    }
    return out;
}

} // namespace phi
