// Serial reference vs OpenMP path for the data-parallel kernels.
// Arg(0) = Exec::Serial, Arg(1) = Exec::Parallel.
#include <benchmark/benchmark.h>

#include <string>

#include "dpe/nn.hpp"
#include "dpe/sweeps.hpp"
#include "dpe/variation.hpp"

using namespace dpe;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_MonteCarloTrials(benchmark::State& state) {
    auto sc = MonteCarloScenario::paper_default();
    VariationSpec spec;
    spec.trials = 256;
    for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_trials(sc, spec, 0.55, 9, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.trials));
    label(state);
}

void BM_LineResistanceMap(benchmark::State& state) {
    CircuitSetup s;
    s.mode = DriveMode::ConfigB;
    s.termination = IdealOpamp{0.3};
    s.parasitics = ParasiticSpec{};
    s.parasitics.lumped_inactive = true;
    s.variant = TappedEvery{16};
    LineResGrid g;
    g.rows = 32;
    g.word_columns = 8;
    g.voltages = {0.4, 0.5, 0.6};
    g.weights = {4, 15};
    for (auto _ : state) benchmark::DoNotOptimize(line_resistance_error_map(s, g, exec_of(state)));
    label(state);
}

void BM_RowScaling(benchmark::State& state) {
    CircuitSetup s;
    s.termination = SenseResistor{50.0, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(row_scaling_curve({1, 8, 16, 32, 64}, s, 0.22, exec_of(state)));
    label(state);
}

void BM_Inference(benchmark::State& state) {
    static const auto split = split_train_test(load_dataset_csv(std::string(DPE_SOURCE_DIR) + "/data/digits.csv"));
    static const auto net = QuantizedNetwork::from(init_network({64, 32, 10}, 1));
    static const CrossbarEngine engine{EngineSpec{}};
    for (auto _ : state) benchmark::DoNotOptimize(infer(split.second, net, engine, Mode::Crossbar, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(split.second.size()));
    label(state);
}

}  // namespace

BENCHMARK(BM_MonteCarloTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LineResistanceMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RowScaling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Inference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
