#include <gtest/gtest.h>
#include <json.hpp>

#include <phi/calibration.hpp>
#include <phi/corpus.hpp>
#include <phi/error.hpp>
#include <phi/report.hpp>

using namespace phi;
using nlohmann::json;

namespace {

SimReport small_report() {
    const auto A = random_bitmatrix(300, 64, 0.1, 1);
    const auto W = random_weights(64, 40, 1);
    CalibrationConfig cfg;
    cfg.q = 16;
    const auto sets = calibrate(A, TileSpec{16}, cfg).sets;
    return sim_layer(A, W, sets, ArchConfig{});
}

}  // namespace

TEST(Report, SchemaAndFields) {
    const auto r = small_report();
    const auto j = json::parse(report_json(r, R"({"command":"simulate","seed":3})", true));
    EXPECT_EQ(j["schema"], "phi_sim_report_v1");
    EXPECT_EQ(j["manifest"]["seed"], 3);
    EXPECT_EQ(j["cycles"]["total"], r.total_cycles);
    EXPECT_EQ(j["cycles"]["rounds"].size(), r.rounds.size());
    EXPECT_EQ(j["dram_bytes"]["total"], r.dram.total());
    EXPECT_EQ(j["ops"]["dense"], r.ops.dense);
    EXPECT_EQ(j["baselines"][0]["name"], "dense");
    EXPECT_DOUBLE_EQ(j["metrics"]["bit_density"].get<double>(), r.metrics.bit_density);
    EXPECT_FALSE(j.contains("rounds"));
}

TEST(Report, InfiniteSpeedupsAreNull) {
    PhiMetrics m;
    m.speedup_over_bit = std::numeric_limits<double>::infinity();
    const auto j = json::parse(metrics_json(m));
    EXPECT_TRUE(j["speedup_over_bit"].is_null());
}

TEST(Report, RejectsBadManifest) {
    EXPECT_THROW(report_json(small_report(), "[1,2]"), FormatError);
    EXPECT_THROW(report_json(small_report(), "{"), FormatError);
}

TEST(Report, PackTraceLines) {
    Pack p;
    p.units = {{UnitKind::nonzero, 3, -1}, {UnitKind::psum, 0, 1}};
    p.rows = {{7, 2}};
    const auto text = pack_trace_jsonl({p, p});
    const auto nl = text.find('\n');
    const auto j = json::parse(text.substr(0, nl));
    EXPECT_EQ(j["units"][0]["value"], -1);
    EXPECT_EQ(j["units"][1]["label"], "psum");
    EXPECT_EQ(j["row_meta"][0]["row"], 7);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
