#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "json.hpp"
#include "dpe/energy.hpp"
#include "dpe/error.hpp"
#include "dpe/io.hpp"
#include "dpe/nn.hpp"
#include "dpe/sweeps.hpp"
#include "dpe/variation.hpp"

namespace dpe::cli {

namespace {

constexpr const char* kVersion = "dpe-sim 1.0.0";

struct Outputs {
    const RunContext& ctx;
    std::string command;
    std::vector<std::string> files;

    CsvTable table(std::vector<std::string> columns) const {
        return CsvTable(command, ctx.config.seed, ctx.config_hash, std::move(columns));
    }
    void save(const CsvTable& t, const std::string& name) {
        t.write((std::filesystem::path(ctx.out_dir) / name).string());
        files.push_back(name);
    }
    void finish(const std::map<std::string, std::string>& extra = {}) {
        const std::string stem = command;
        const std::string resolved = stem + ".resolved.json";
        write_text((std::filesystem::path(ctx.out_dir) / resolved).string(), resolved_config_json(ctx.config));
        nlohmann::json m;
        m["command"] = command;
        m["version"] = kVersion;
        m["schema_version"] = kSchemaVersion;
        m["seed"] = ctx.config.seed;
        m["config_hash"] = ctx.config_hash;
        m["resolved_config"] = resolved;
        m["outputs"] = files;
        for (const auto& [k, v] : extra) m[k] = v;
        write_text((std::filesystem::path(ctx.out_dir) / (stem + ".manifest.json")).string(), m.dump(2) + "\n");
    }
};

CircuitSetup base_setup(const ExperimentConfig& c, DriveMode mode) {
    CircuitSetup s;
    s.device = c.device;
    s.v_dd = c.v_dd;
    s.mode = mode;
    s.v_bias = mode == DriveMode::ConfigB ? c.config_b.v_bias : 0.0;
    return s;
}

const ModeSettings& settings(const ExperimentConfig& c, DriveMode m) {
    return m == DriveMode::ConfigA ? c.config_a : c.config_b;
}

const char* mode_label(DriveMode m) { return m == DriveMode::ConfigA ? "A" : "B"; }

// Single-cell characterization reads the RBL through the sense resistor.
CircuitSetup sensed_setup(const ExperimentConfig& c, DriveMode m) {
    CircuitSetup s = base_setup(c, m);
    s.termination = settings(c, m).sense;
    return s;
}

int cmd_iv_sweep(const RunContext& ctx) {
    const auto& c = ctx.config;
    Outputs out{ctx, "iv-sweep", {}};
    auto t = out.table({"config", "weight", "v_in", "i_rbl"});
    for (DriveMode m : {DriveMode::ConfigA, DriveMode::ConfigB}) {
        const auto setup = sensed_setup(c, m);
        const auto vs = (m == DriveMode::ConfigA ? c.iv_sweep.config_a : c.iv_sweep.config_b).values();
        struct Job {
            int w;
            double v;
        };
        std::vector<Job> jobs;
        for (int w : c.iv_sweep.weights)
            for (double v : vs) jobs.push_back({w, v});
        std::vector<double> i(jobs.size());
        parallel_for(ctx.exec, jobs.size(), [&](std::size_t k) {
            i[k] = std::abs(single_word_current(setup, jobs[k].w, jobs[k].v));
        });
        for (std::size_t k = 0; k < jobs.size(); ++k) t.row().add(mode_label(m)).add(jobs[k].w).add(jobs[k].v).add(i[k]);
    }
    out.save(t, "iv_sweep.csv");
    out.finish();
    return 0;
}

int cmd_weight_sweep(const RunContext& ctx) {
    const auto& c = ctx.config;
    Outputs out{ctx, "weight-sweep", {}};
    auto t = out.table({"config", "v_in", "weight", "i_rbl"});
    auto fits = out.table({"config", "v_in", "slope", "r2"});
    for (DriveMode m : {DriveMode::ConfigA, DriveMode::ConfigB}) {
        const auto setup = sensed_setup(c, m);
        const auto& vs = m == DriveMode::ConfigA ? c.weight_sweep.config_a : c.weight_sweep.config_b;
        for (double v : vs) {
            std::vector<double> w(kMaxWeightLevel + 1), i(kMaxWeightLevel + 1);
            parallel_for(ctx.exec, w.size(), [&](std::size_t k) {
                w[k] = static_cast<double>(k);
                i[k] = std::abs(single_word_current(setup, static_cast<int>(k), v));
            });
            for (std::size_t k = 0; k < w.size(); ++k) t.row().add(mode_label(m)).add(v).add(k).add(i[k]);
            const auto f = fit_through_origin(w, i);
            fits.row().add(mode_label(m)).add(v).add(f.slope).add(f.r2);
        }
    }
    out.save(t, "weight_sweep.csv");
    out.save(fits, "weight_sweep_fit.csv");
    out.finish();
    return 0;
}

int cmd_row_scaling(const RunContext& ctx) {
    const auto& c = ctx.config;
    Outputs out{ctx, "row-scaling", {}};
    auto t = out.table({"termination", "n", "i_n", "n_times_i1", "deviation_pct"});
    CircuitSetup s = base_setup(c, DriveMode::ConfigA);
    for (Termination term : {Termination{c.config_a.sense}, Termination{c.config_a.opamp}}) {
        s.termination = term;
        for (const auto& p : row_scaling_curve(c.row_scaling.n, s, c.config_a.v_max, ctx.exec))
            t.row().add(describe(term)).add(p.n).add(p.i_n).add(p.n_times_i1).add(p.deviation_pct);
    }
    out.save(t, "row_scaling.csv");
    out.finish();
    return 0;
}

struct Variant {
    std::string name;
    CircuitSetup setup;
    std::vector<Voltage> voltages;
};

std::vector<Variant> lineres_variants(const ExperimentConfig& c) {
    const auto& l = c.lineres_map;
    CircuitSetup a = base_setup(c, DriveMode::ConfigA);
    a.termination = c.config_a.opamp;
    a.parasitics = c.parasitics;
    CircuitSetup b = base_setup(c, DriveMode::ConfigB);
    b.termination = c.config_b.opamp;
    b.parasitics = c.parasitics;
    const auto va = l.config_a_voltages.values();
    const auto vb = l.config_b_voltages.values();
    std::vector<Variant> v;
    v.push_back({"config_a_single_end", a, va});
    b.variant = SingleEnd{};
    v.push_back({"config_b_single_end", b, vb});
    b.variant = BothEnds{};
    v.push_back({"config_b_both_ends", b, vb});
    b.variant = TappedEvery{l.tap_every};
    v.push_back({"config_b_tapped", b, vb});
    return v;
}

int cmd_lineres_map(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto& l = c.lineres_map;
    Outputs out{ctx, "lineres-map", {}};
    auto map = out.table({"variant", "active_rows", "v_in", "weight", "group", "ideal", "solved", "error_pct"});
    auto bars = out.table({"variant", "active_rows", "v_in", "weight", "error_pct"});
    for (const auto& v : lineres_variants(c)) {
        LineResGrid g{l.rows, l.word_columns, v.voltages, l.weights, l.active_rows};
        if (std::find(l.map_variants.begin(), l.map_variants.end(), v.name) != l.map_variants.end()) {
            for (const auto& p : line_resistance_error_map(v.setup, g, ctx.exec)) {
                const auto err = p.group_error_pct();
                for (std::size_t k = 0; k < err.size(); ++k)
                    map.row().add(v.name).add(p.active_rows).add(p.v_in).add(p.weight).add(k).add(p.ideal[k])
                        .add(p.solved[k]).add(err[k]);
            }
        }
        // Worst-case corner: every active input at the top of the range, all words '1111'.
        g.voltages = {v.voltages.back()};
        g.weights = {kMaxWeightLevel};
        for (const auto& p : line_resistance_error_map(v.setup, g, ctx.exec))
            bars.row().add(v.name).add(p.active_rows).add(p.v_in).add(p.weight).add(p.error_pct);
    }
    out.save(map, "lineres_map.csv");
    out.save(bars, "lineres_worst.csv");
    out.finish();
    return 0;
}

int cmd_montecarlo(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto& m = c.montecarlo;
    Outputs out{ctx, "montecarlo", {}};
    MonteCarloScenario sc;
    sc.setup = base_setup(c, DriveMode::ConfigB);
    sc.setup.termination = c.config_b.opamp;
    sc.rows = m.rows;
    sc.voltages = m.voltages.values();
    sc.weights = m.weights;
    VariationSpec spec{m.sigma_min, 1.0, c.seed, m.trials};
    const auto pts = monte_carlo_stats(sc, spec, ctx.exec);
    auto t = out.table({"v_in", "weight", "nominal", "mean", "std"});
    for (const auto& p : pts) t.row().add(p.v_in).add(p.weight).add(p.nominal).add(p.mean).add(p.std);
    out.save(t, "montecarlo.csv");
    if (pts.size() >= 10) {
        const auto f = fit_std_vs_current(pts);
        auto ft = out.table({"a", "b", "domain_lo", "domain_hi", "residual_norm", "rms_residual", "points"});
        ft.row().add(f.a).add(f.b).add(f.domain_lo).add(f.domain_hi).add(f.residual_norm).add(f.rms_residual()).add(f.points);
        out.save(ft, "montecarlo_fit.csv");
    } else {
        std::fprintf(stderr, "montecarlo: fewer than 10 grid points, fit skipped\n");
    }
    out.finish();
    return 0;
}

int cmd_nn(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto& n = c.nn;
    Outputs out{ctx, "nn", {}};
    const std::string data_path =
        n.dataset.empty() ? std::string(DPE_SOURCE_DIR) + "/data/digits.csv" : resolve_path(c.base_dir, n.dataset);
    const auto [train, test] = split_train_test(load_dataset_csv(data_path));
    int classes = 0;
    for (int y : train.labels) classes = std::max(classes, y + 1);
    for (int y : test.labels) classes = std::max(classes, y + 1);

    RealNetwork net;
    if (n.weights_file.empty()) {
        net = train_reference(train, {train.features, n.hidden, static_cast<std::size_t>(classes)},
                              {n.epochs, n.learning_rate, c.seed});
        save_network((std::filesystem::path(ctx.out_dir) / "nn_weights.txt").string(), net);
        out.files.push_back("nn_weights.txt");
    } else {
        net = load_network(resolve_path(c.base_dir, n.weights_file));
    }
    const auto q = QuantizedNetwork::from(net);

    EngineSpec es;
    es.device = c.device;
    es.v_dd = c.v_dd;
    es.v_pos = c.config_a.opamp.v_pos;
    es.encoding = {n.v_low, n.v_high};
    es.tile_rows = n.tile_rows;
    es.adc_bits = n.adc_bits;
    es.seed = c.seed;
    es.fit = crossbar_variation_fit(es, {n.sigma_min, 1.0, c.seed, n.variation_trials}, n.variation_voltage_step);
    const CrossbarEngine engine(es);

    auto t = out.table({"mode", "accuracy", "samples"});
    t.row().add("float").add(real_accuracy(net, test)).add(test.size());
    for (Mode m : {Mode::Ideal, Mode::Crossbar, Mode::CrossbarVariation})
        t.row().add(mode_name(m)).add(infer(test, q, engine, m, ctx.exec)).add(test.size());
    out.save(t, "nn.csv");
    auto ft = out.table({"a", "b", "domain_hi", "rms_residual", "i_max"});
    ft.row().add(es.fit.a).add(es.fit.b).add(es.fit.domain_hi).add(es.fit.rms_residual()).add(engine.normalization().i_max);
    out.save(ft, "nn_surrogate.csv");
    out.finish();
    return 0;
}

int cmd_energy(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto& e = c.energy;
    Outputs out{ctx, "energy", {}};
    const std::string params_hash = hex64(fnv1a64(energy_params_json(e.params)));

    // Average column currents over seeded random weight/input patterns.
    ArrayGeometry g;
    g.rows = e.rows;
    g.word_columns = e.words;
    std::vector<std::vector<Current>> per_sample(e.samples);
    parallel_for(ctx.exec, e.samples, [&](std::size_t s) {
        CounterRng rng(c.seed, s);
        std::vector<std::uint8_t> levels(e.rows * e.words);
        for (auto& l : levels) l = static_cast<std::uint8_t>(std::min(15.0, std::floor(rng.uniform() * 16.0)));
        Excitation x;
        x.mode = DriveMode::ConfigA;
        x.v_dd = c.v_dd;
        for (std::size_t r = 0; r < e.rows; ++r) x.inputs.push_back(c.nn.v_low + rng.uniform() * (c.config_a.v_max - c.nn.v_low));
        const auto cells = pack_weights(WeightMatrix(e.rows, e.words, levels), g);
        const auto net = build_network(g, c.parasitics, SingleEnd{}, c.config_a.opamp, x, cells, c.device);
        per_sample[s] = solve_operating_point(net).columns.groups;
    });
    std::vector<Current> avg(e.words, 0.0);
    for (std::size_t w = 0; w < e.words; ++w) {
        CompensatedSum s;
        for (const auto& v : per_sample) s.add(std::abs(v[w]));
        avg[w] = s.value() / static_cast<double>(e.samples);
    }

    const WorkloadSpec work{e.rows, e.words, kBitsPerWord};
    const auto dpe = dpe_energy(work, e.params, avg);
    const auto dig = digital_energy(work, e.params);
    const auto warnings = electromigration_warnings(e.params, avg);
    for (auto w : warnings)
        std::fprintf(stderr, "warning: word column %zu carries %.3g A, above the %.3g A ceiling\n", w, avg[w],
                     e.params.em_ceiling);

    auto t = out.table({"engine", "energy_j", "time_s", "dac_j", "adc_j", "analog_j", "array_j", "peripheral_share",
                        "em_warnings", "params_hash"});
    t.row().add("dpe").add(dpe.total()).add(dpe.time).add(dpe.dac).add(dpe.adc).add(dpe.analog).add(dpe.array)
        .add(dpe.peripheral_share()).add(warnings.size()).add(params_hash);
    t.row().add("digital").add(dig.energy).add(dig.time).add(0.0).add(0.0).add(0.0).add(0.0).add(0.0).add(0).add(params_hash);
    out.save(t, "energy.csv");
    out.finish({{"energy_params_hash", params_hash}});
    return 0;
}

using Command = std::function<int(const RunContext&)>;

const std::vector<std::pair<std::string, Command>>& registry() {
    static const std::vector<std::pair<std::string, Command>> r{
        {"iv-sweep", cmd_iv_sweep},       {"weight-sweep", cmd_weight_sweep}, {"row-scaling", cmd_row_scaling},
        {"lineres-map", cmd_lineres_map}, {"montecarlo", cmd_montecarlo},     {"nn", cmd_nn},
        {"energy", cmd_energy},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : registry()) n.push_back(k);
        return n;
    }();
    return names;
}

int run_command(const std::string& name, const RunContext& ctx) {
    for (const auto& [k, fn] : registry())
        if (k == name) return fn(ctx);
    throw InvalidInput("unknown command " + name);
}

}  // namespace dpe::cli
