// phi: calibrate, decompose, verify, simulate and sweep from the command line.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or format error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <phi/phi.hpp>

#include "manifest.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace phi::cli {
namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct Common {
    fs::path acts, weights, patterns, config, out;
    std::uint32_t k = 16;
    std::uint32_t q = 128;
    std::uint64_t seed = 0;
    std::string format = "json";
};

void emit(const std::string& text, const fs::path& out) {
    if (out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os) throw FormatError("cannot write " + out.string());
    os << text;
    if (!text.empty() && text.back() != '\n') os << '\n';
}

CenterInit parse_init(const std::string& s) {
    if (s == "uniform") return CenterInit::uniform;
    if (s == "plusplus" || s == "kmeans++") return CenterInit::plus_plus;
    throw ConfigError("unknown --init '" + s + "' (uniform, plusplus)");
}

const char* init_name(CenterInit init) {
    return init == CenterInit::uniform ? "uniform" : "plusplus";
}

ArchConfig load_config(const Common& c) {
    return c.config.empty() ? ArchConfig{} : load_arch_config(c.config);
}

std::uint32_t patterns_k(const std::vector<PatternSet>& sets) {
    if (sets.empty()) throw FormatError("pattern file holds no partitions");
    return sets.front().k();
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string kind = "acts";
    std::size_t rows = 4096, cols = 256, n = 128;
    double density = 0.1;
};

int cmd_gen(const Common& c, const GenArgs& g) {
    if (c.out.empty()) throw ConfigError("gen needs --out");
    if (g.kind == "acts") {
        store_bitmatrix(c.out, random_bitmatrix(g.rows, g.cols, g.density, c.seed));
    } else if (g.kind == "weights") {
        store_weights(c.out, random_weights(g.rows, g.cols, c.seed));
    } else if (g.kind == "corpus") {
        fs::create_directories(c.out);
        store_bitmatrix(c.out / "calibration.phia", random_bitmatrix(g.rows, g.cols, g.density, c.seed));
        store_bitmatrix(c.out / "evaluation.phia", random_bitmatrix(g.rows, g.cols, g.density, c.seed + 1));
        store_weights(c.out / "weights.phiw", random_weights(g.cols, g.n, c.seed + 2));
    } else {
        throw ConfigError("unknown --kind '" + g.kind + "' (acts, weights, corpus)");
    }
    return kOk;
}

struct CalibArgs {
    std::string init = "uniform";
    double sample_fraction = 0.1;
    std::uint32_t max_iters = 25;
};

CalibrationConfig calib_config(const Common& c, const CalibArgs& a) {
    CalibrationConfig cfg;
    cfg.q = c.q;
    cfg.seed = c.seed;
    cfg.init = parse_init(a.init);
    cfg.sample_fraction = a.sample_fraction;
    cfg.max_iters = a.max_iters;
    cfg.validate();
    return cfg;
}

int cmd_calibrate(const Common& c, const CalibArgs& a) {
    if (c.out.empty()) throw ConfigError("calibrate needs --out");
    const auto A = load_bitmatrix(c.acts);
    const auto cfg = calib_config(c, a);
    const auto cal = calibrate(A, TileSpec{c.k}, cfg);
    store_patterns(c.out, cal.sets);

    RunManifest m{"calibrate", {{"acts", c.acts}}, c.seed, {}, {}};
    m.parameters = {{"k", c.k}, {"q", c.q}, {"init", init_name(cfg.init)},
                    {"sample_fraction", cfg.sample_fraction}, {"max_iters", cfg.max_iters}};

    json parts = json::array();
    std::uint64_t total_cost = 0;
    for (std::size_t j = 0; j < cal.partitions.size(); ++j) {
        const auto& p = cal.partitions[j];
        total_cost += p.result.cost;
        parts.push_back({{"partition", j},
                         {"sampled_rows", p.sampled_rows},
                         {"usable_rows", p.usable_rows},
                         {"patterns", p.result.patterns.size()},
                         {"cost", p.result.cost},
                         {"iterations", p.result.iterations},
                         {"short_of_q", p.result.short_of_q}});
        if (p.result.short_of_q)
            std::cerr << "warning: partition " << j << ": " << p.result.patterns.size() << " of " << c.q
                      << " patterns (not enough distinct rows or degenerate centers)\n";
    }
    json out;
    out["manifest"] = m.to_json();
    out["k"] = c.k;
    out["q"] = c.q;
    out["partitions_count"] = cal.sets.size();
    out["total_cost"] = total_cost;
    out["partitions"] = std::move(parts);
    std::cout << out.dump(2) << '\n';
    return kOk;
}

struct DecompArgs {
    fs::path out_l1, out_l2;
};

int cmd_decompose(const Common& c, const DecompArgs& a) {
    const auto A = load_bitmatrix(c.acts);
    const auto sets = load_patterns(c.patterns);
    const TileSpec spec{patterns_k(sets)};
    const auto dec = decompose(A, sets, spec);
    if (!a.out_l1.empty()) store_indices(a.out_l1, dec.l1);
    if (!a.out_l2.empty()) store_ternary(a.out_l2, dec.l2);

    RunManifest m{"decompose", {{"acts", c.acts}, {"patterns", c.patterns}}, std::nullopt, {}, {}};
    json out;
    out["manifest"] = m.to_json();
    out["metrics"] = json::parse(metrics_json(metrics(A, dec.l1, sets, dec.l2, spec)));
    emit(out.dump(2), c.out);
    return kOk;
}

struct VerifyArgs {
    fs::path l1, l2;
    bool float_mode = false;
    double rel_tol = 1e-4;
};

std::optional<std::pair<std::size_t, std::size_t>> first_mismatch(const BitMatrix& a, const BitMatrix& b) {
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t col = 0; col < a.cols(); ++col)
            if (a.get(r, col) != b.get(r, col)) return std::pair{r, col};
    return std::nullopt;
}

int cmd_verify(const Common& c, const VerifyArgs& a) {
    const auto A = load_bitmatrix(c.acts);
    const auto sets = load_patterns(c.patterns);
    const auto W = load_weights(c.weights);
    const TileSpec spec{patterns_k(sets)};
    if (W.rows() != A.cols())
        throw ShapeError("weights have " + std::to_string(W.rows()) + " rows, activations have " +
                         std::to_string(A.cols()) + " columns");

    Decomposition dec;
    if (a.l1.empty() != a.l2.empty()) throw ConfigError("--l1 and --l2 go together");
    if (a.l1.empty()) {
        dec = decompose(A, sets, spec);
    } else {
        dec.l1 = load_indices(a.l1);
        dec.l2 = load_ternary(a.l2);
        if (dec.l1.rows() != A.rows() || dec.l1.partitions() != sets.size() || dec.l2.rows() != A.rows() ||
            dec.l2.cols() != A.cols())
            throw ShapeError("decomposition files do not match the activation shape");
    }

    bool ok = true;
    try {
        const auto back = reconstruct(dec.l1, sets, dec.l2, spec);
        if (auto at = first_mismatch(A, back)) {
            std::cout << "lossless: FAIL first mismatch at row " << at->first << ", col " << at->second << '\n';
            ok = false;
        } else {
            std::cout << "lossless: PASS\n";
        }
    } catch (const CorruptionError& e) {
        std::cout << "lossless: FAIL first mismatch at row " << e.row() << ", col " << e.col() << " ("
                  << e.what() << ")\n";
        return kVerifyFailed;
    }

    if (a.float_mode) {
        FloatWeightMatrix Wf(W.rows(), W.cols());
        for (std::size_t r = 0; r < W.rows(); ++r)
            for (std::size_t col = 0; col < W.cols(); ++col)
                Wf.at(r, col) = static_cast<float>(W.at(r, col)) / 128.0f + 0.001f * static_cast<float>(col % 7);
        const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), Wf, spec);
        const auto got = phi_matmul(dec.l1, dec.l2, pwps, Wf, spec);
        const auto want = dense_matmul(A, Wf);
        double worst = 0;
        for (std::size_t i = 0; i < want.data().size(); ++i) {
            const double denom = std::max(1.0, std::abs(want.data()[i]));
            worst = std::max(worst, std::abs(got.data()[i] - want.data()[i]) / denom);
        }
        const bool pass = worst <= a.rel_tol;
        std::cout << "matmul(float): " << (pass ? "PASS" : "FAIL") << " max relative error " << worst << '\n';
        ok = ok && pass;
    } else {
        const auto pwps = build_pwp_table(std::span<const PatternSet>(sets), W, spec);
        const auto got = phi_matmul(dec.l1, dec.l2, pwps, W, spec);
        const auto want = dense_matmul(A, W);
        std::optional<std::pair<std::size_t, std::size_t>> bad;
        for (std::size_t r = 0; r < want.rows() && !bad; ++r)
            for (std::size_t col = 0; col < want.cols(); ++col)
                if (got.at(r, col) != want.at(r, col)) {
                    bad = std::pair{r, col};
                    break;
                }
        if (bad) {
            std::cout << "matmul: FAIL first mismatch at row " << bad->first << ", col " << bad->second << '\n';
            ok = false;
        } else {
            std::cout << "matmul: PASS\n";
        }
    }
    return ok ? kOk : kVerifyFailed;
}

struct SimArgs {
    bool no_prefetch = false;
    bool rounds = false;
    std::vector<std::uint64_t> paft_n;
};

int cmd_simulate(const Common& c, const SimArgs& a) {
    const auto A = load_bitmatrix(c.acts);
    const auto sets = load_patterns(c.patterns);
    const auto W = load_weights(c.weights);
    auto cfg = load_config(c);
    cfg.tile.k = patterns_k(sets);
    std::size_t qmax = 0;
    for (const auto& s : sets) qmax = std::max(qmax, s.size());
    cfg.q = std::max<std::uint32_t>(cfg.q, static_cast<std::uint32_t>(qmax));
    if (a.no_prefetch) cfg.prefetch = false;
    cfg.validate();

    const auto dec = decompose(A, sets, cfg.tile);
    const auto report = sim_layer(A, dec, W, sets, cfg);

    if (c.format == "csv") {
        std::vector<SweepRow> rows{{SweepPoint{cfg.tile.k, cfg.q, cfg.total_buffer_bytes()}, report}};
        emit(sweep_csv(rows), c.out);
        return kOk;
    }

    RunManifest m{"simulate", {{"acts", c.acts}, {"patterns", c.patterns}, {"weights", c.weights}},
                  std::nullopt, {}, to_config_text(cfg)};
    if (!c.config.empty()) m.inputs.emplace_back("config", c.config);
    m.parameters = {{"no_prefetch", a.no_prefetch}};

    auto doc = json::parse(report_json(report, m.to_json().dump(), a.rounds));
    if (!a.paft_n.empty()) {
        if (a.paft_n.size() != 1)
            throw ConfigError("simulate takes one layer; use 'phi paft' for several");
        doc["paft_r"] = a.paft_n.front() * dec.l2.nnz();
        std::cerr << "paft R = " << a.paft_n.front() * dec.l2.nnz() << '\n';
    }
    emit(doc.dump(2), c.out);
    return kOk;
}

struct PaftArgs {
    std::vector<fs::path> acts, patterns;
    std::vector<std::uint64_t> n;
};

int cmd_paft(const PaftArgs& a) {
    if (a.acts.size() != a.patterns.size() || a.acts.size() != a.n.size() || a.acts.empty())
        throw ConfigError("--acts, --patterns and --n need one entry per layer");
    std::vector<BitMatrix> acts;
    std::vector<std::vector<PatternSet>> sets;
    for (std::size_t l = 0; l < a.acts.size(); ++l) {
        acts.push_back(load_bitmatrix(a.acts[l]));
        sets.push_back(load_patterns(a.patterns[l]));
    }
    const std::uint32_t k = patterns_k(sets.front());
    std::vector<RegularizerLayer> layers;
    for (std::size_t l = 0; l < acts.size(); ++l) {
        if (patterns_k(sets[l]) != k) throw ShapeError("all layers must share k");
        layers.push_back({&acts[l], a.n[l], sets[l]});
    }
    std::cout << paft_regularizer(layers, TileSpec{k}) << '\n';
    return kOk;
}

struct SweepArgs {
    fs::path corpus, calib;
    std::string grid;
    CalibArgs calib_args;
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
    fs::path calib_path = a.calib, eval_path = c.acts, weights_path = c.weights;
    if (!a.corpus.empty()) {
        if (calib_path.empty()) calib_path = a.corpus / "calibration.phia";
        if (eval_path.empty()) eval_path = a.corpus / "evaluation.phia";
        if (weights_path.empty()) weights_path = a.corpus / "weights.phiw";
    }
    if (eval_path.empty() || weights_path.empty())
        throw ConfigError("sweep needs --corpus or --acts and --weights");
    if (calib_path.empty()) calib_path = eval_path;

    const auto grid = parse_sweep_grid(a.grid);
    const auto calib = load_bitmatrix(calib_path);
    const auto eval = load_bitmatrix(eval_path);
    const auto W = load_weights(weights_path);
    auto base = load_config(c);
    base.tile.k = c.k;
    base.q = c.q;
    const auto cc = calib_config(c, a.calib_args);

    const auto rows = run_sweep(calib, eval, W, base, cc, grid);

    json plateaus = json::array();
    if (!grid.buffer_bytes.empty()) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;
        for (const auto& r : rows) {
            const std::pair kq{r.point.k, r.point.q};
            if (std::find(seen.begin(), seen.end(), kq) != seen.end()) continue;
            seen.push_back(kq);
            const auto p = dram_plateau(rows, kq.first, kq.second);
            plateaus.push_back({{"k", kq.first}, {"q", kq.second},
                                {"plateau_bytes", p ? json(*p) : json(nullptr)}});
            std::cerr << "plateau k=" << kq.first << " q=" << kq.second << ": "
                      << (p ? std::to_string(*p) + " bytes" : std::string("not reached")) << '\n';
        }
    }
    if (grid.k.size() > 1) std::cerr << "best k by L2 density: " << best_k_by_l2_density(rows) << '\n';

    if (c.format == "csv") {
        emit(sweep_csv(rows), c.out);
        return kOk;
    }
    RunManifest m{"sweep", {{"calibration", calib_path}, {"evaluation", eval_path}, {"weights", weights_path}},
                  c.seed, {}, to_config_text(base)};
    if (!c.config.empty()) m.inputs.emplace_back("config", c.config);
    m.parameters = {{"grid", a.grid}, {"init", init_name(cc.init)}, {"sample_fraction", cc.sample_fraction}};
    json out;
    out["manifest"] = m.to_json();
    out["plateaus"] = std::move(plateaus);
    json points = json::array();
    for (const auto& r : rows) {
        auto rep = json::parse(report_json(r.report));
        points.push_back({{"k", r.point.k}, {"q", r.point.q}, {"buffer_bytes", r.point.buffer_bytes},
                          {"report", std::move(rep)}});
    }
    out["points"] = std::move(points);
    emit(out.dump(2), c.out);
    return kOk;
}

int cmd_metrics(const Common& c) {
    const auto A = load_bitmatrix(c.acts);
    const auto sets = load_patterns(c.patterns);
    const TileSpec spec{patterns_k(sets)};
    const auto dec = decompose(A, sets, spec);
    const auto m = metrics(A, dec.l1, sets, dec.l2, spec);
    if (c.format == "csv") {
        std::ostringstream os;
        os << "bit_density,l1_density,l2_pos_density,l2_neg_density,index_density,speedup_over_bit,"
              "speedup_over_dense,pwp_utilization\n"
           << m.bit_density << ',' << m.l1_density << ',' << m.l2_pos_density << ',' << m.l2_neg_density << ','
           << m.index_density << ',' << m.speedup_over_bit << ',' << m.speedup_over_dense << ','
           << m.pwp_utilization << '\n';
        emit(os.str(), c.out);
        return kOk;
    }
    emit(json::parse(metrics_json(m)).dump(2), c.out);
    return kOk;
}

} // namespace
} // namespace phi::cli

int main(int argc, char** argv) {
    using namespace phi::cli;

    CLI::App app{"Pattern-based hierarchical sparsity for binary activation matrices"};
    app.set_version_flag("--version", PHI_VERSION);
    app.require_subcommand(1);

    Common c;
    auto add_io = [&c](CLI::App* sub, bool acts, bool patterns, bool weights) {
        if (acts) sub->add_option("--acts", c.acts, "Activation matrix (PHIA)")->check(CLI::ExistingFile);
        if (patterns) sub->add_option("--patterns", c.patterns, "Pattern sets (PHIP)")->check(CLI::ExistingFile);
        if (weights) sub->add_option("--weights", c.weights, "Weight matrix (PHIW)")->check(CLI::ExistingFile);
    };
    auto add_format = [&c](CLI::App* sub) {
        sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    };

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate seeded random activations, weights or a corpus");
    gen->add_option("--kind", gen_args.kind, "acts, weights or corpus")
            ->check(CLI::IsMember({"acts", "weights", "corpus"}));
    gen->add_option("--rows", gen_args.rows, "Rows (M, or K for weights)");
    gen->add_option("--cols", gen_args.cols, "Columns (K, or N for weights)");
    gen->add_option("--n", gen_args.n, "Weight columns of a corpus");
    gen->add_option("--density", gen_args.density, "Bernoulli density")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", c.seed);
    gen->add_option("--out", c.out, "Output file, or directory for a corpus")->required();

    CalibArgs calib_args;
    auto add_calib = [&c](CLI::App* sub, CalibArgs& a) {
        sub->add_option("--k", c.k, "Partition width")->check(CLI::Range(1, 64));
        sub->add_option("--q", c.q, "Patterns per partition")->check(CLI::Range(1, 65535));
        sub->add_option("--seed", c.seed);
        sub->add_option("--init", a.init, "Center seeding: uniform or plusplus");
        sub->add_option("--sample-fraction", a.sample_fraction, "Fraction of rows sampled")
                ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--max-iters", a.max_iters);
    };
    auto* cal = app.add_subcommand("calibrate", "Learn pattern sets from activations");
    add_io(cal, true, false, false);
    cal->get_option("--acts")->required();
    add_calib(cal, calib_args);
    cal->add_option("--out", c.out, "Pattern file (PHIP)")->required();

    DecompArgs dec_args;
    auto* dec = app.add_subcommand("decompose", "Split activations into pattern IDs and a ternary correction");
    add_io(dec, true, true, false);
    dec->get_option("--acts")->required();
    dec->get_option("--patterns")->required();
    dec->add_option("--out-l1", dec_args.out_l1, "Pattern IDs (PHII)");
    dec->add_option("--out-l2", dec_args.out_l2, "Ternary correction (PHIT)");
    dec->add_option("--out", c.out, "Metrics JSON (default stdout)");

    VerifyArgs ver_args;
    auto* ver = app.add_subcommand("verify", "Check losslessness and matmul equality");
    add_io(ver, true, true, true);
    for (const char* o : {"--acts", "--patterns", "--weights"}) ver->get_option(o)->required();
    ver->add_option("--l1", ver_args.l1, "Existing pattern IDs (PHII)")->check(CLI::ExistingFile);
    ver->add_option("--l2", ver_args.l2, "Existing ternary correction (PHIT)")->check(CLI::ExistingFile);
    ver->add_flag("--float", ver_args.float_mode, "Compare in floating point");
    ver->add_option("--rel-tol", ver_args.rel_tol, "Relative tolerance in float mode");

    SimArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run the cycle-level accelerator model on one layer");
    add_io(sim, true, true, true);
    for (const char* o : {"--acts", "--patterns", "--weights"}) sim->get_option(o)->required();
    sim->add_option("--config", c.config, "Architecture config")->check(CLI::ExistingFile);
    sim->add_flag("--no-prefetch", sim_args.no_prefetch, "Disable PWP prefetching");
    sim->add_flag("--rounds", sim_args.rounds, "Include per-round cycles");
    sim->add_option("--paft-r", sim_args.paft_n, "Layer N; also report the regularizer")->delimiter(',');
    sim->add_option("--out", c.out);
    add_format(sim);

    PaftArgs paft_args;
    auto* paft = app.add_subcommand("paft", "Evaluate the fine-tuning regularizer over several layers");
    paft->add_option("--acts", paft_args.acts)->required()->delimiter(',')->check(CLI::ExistingFile);
    paft->add_option("--patterns", paft_args.patterns)->required()->delimiter(',')->check(CLI::ExistingFile);
    paft->add_option("--n", paft_args.n, "N per layer")->required()->delimiter(',');

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Design-space sweep over k, q and buffer size");
    sweep->add_option("--corpus", sweep_args.corpus, "Directory written by 'gen --kind corpus'")
            ->check(CLI::ExistingDirectory);
    add_io(sweep, true, false, true);
    sweep->add_option("--calib", sweep_args.calib, "Calibration activations (PHIA)")->check(CLI::ExistingFile);
    sweep->add_option("--grid", sweep_args.grid, "e.g. \"k=8,16,32;q=128;buffer=60K,240K\"")->required();
    sweep->add_option("--config", c.config)->check(CLI::ExistingFile);
    add_calib(sweep, sweep_args.calib_args);
    sweep->add_option("--out", c.out);
    add_format(sweep);

    auto* met = app.add_subcommand("metrics", "Sparsity metrics of a decomposition");
    add_io(met, true, true, false);
    met->get_option("--acts")->required();
    met->get_option("--patterns")->required();
    met->add_option("--out", c.out);
    add_format(met);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_gen(c, gen_args);
        if (*cal) return cmd_calibrate(c, calib_args);
        if (*dec) return cmd_decompose(c, dec_args);
        if (*ver) return cmd_verify(c, ver_args);
        if (*sim) return cmd_simulate(c, sim_args);
        if (*paft) return cmd_paft(paft_args);
        if (*sweep) return cmd_sweep(c, sweep_args);
        if (*met) return cmd_metrics(c);
    } catch (const phi::CorruptionError& e) {
        std::cerr << "error: " << e.what() << " at row " << e.row() << ", col " << e.col() << '\n';
        return kVerifyFailed;
    } catch (const phi::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
