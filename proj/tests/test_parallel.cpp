#include <atomic>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpe/nn.hpp"
#include "dpe/parallel.hpp"
#include "dpe/sweeps.hpp"
#include "dpe/variation.hpp"

using namespace dpe;

namespace {

// The sandbox may expose a single core; force a real team so the parallel
// path interleaves.
struct Team {
    Team() { set_thread_count(4); }
} const team;

}  // namespace

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(Exec::Parallel, hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    int calls = 0;
    parallel_for(Exec::Parallel, 0, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
}

TEST_CASE("parallel_for rethrows on the caller") {
    std::atomic<int> done{0};
    CHECK_THROWS_AS(parallel_for(Exec::Parallel, 64,
                                 [&](std::size_t i) {
                                     if (i == 17) throw std::runtime_error("boom");
                                     ++done;
                                 }),
                    std::runtime_error);
    CHECK(done.load() == 63);
    CHECK_THROWS_AS(parallel_for(Exec::Serial, 4, [](std::size_t) { throw std::logic_error("x"); }), std::logic_error);
}

TEST_CASE("Monte Carlo is identical serial and parallel") {
    auto sc = MonteCarloScenario::paper_default();
    sc.voltages = {0.45, 0.6};
    sc.weights = {3, 15};
    VariationSpec v;
    v.trials = 200;
    const auto a = monte_carlo_stats(sc, v, Exec::Serial);
    const auto b = monte_carlo_stats(sc, v, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].mean == b[k].mean);
        CHECK(a[k].std == b[k].std);
        CHECK(a[k].nominal == b[k].nominal);
    }
    CHECK(monte_carlo_trials(sc, v, 0.5, 7, Exec::Serial) == monte_carlo_trials(sc, v, 0.5, 7, Exec::Parallel));
}

TEST_CASE("sweeps are identical serial and parallel") {
    CircuitSetup s;
    s.termination = SenseResistor{50.0, 0.0};
    const std::vector<std::size_t> ns{1, 8, 16, 32};
    const auto a = row_scaling_curve(ns, s, 0.2, Exec::Serial);
    const auto b = row_scaling_curve(ns, s, 0.2, Exec::Parallel);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].i_n == b[k].i_n);

    CircuitSetup t;
    t.mode = DriveMode::ConfigB;
    t.termination = IdealOpamp{0.3};
    t.parasitics = ParasiticSpec{};
    t.parasitics.lumped_inactive = true;
    t.variant = TappedEvery{16};
    LineResGrid g;
    g.rows = 32;
    g.word_columns = 8;
    g.voltages = {0.4, 0.6};
    g.weights = {5, 15};
    const auto x = line_resistance_error_map(t, g, Exec::Serial);
    const auto y = line_resistance_error_map(t, g, Exec::Parallel);
    REQUIRE(x.size() == y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        CHECK(x[k].solved == y[k].solved);
        CHECK(x[k].error_pct == y[k].error_pct);
    }
}

TEST_CASE("inference is identical serial and parallel") {
    CounterRng rng(3, 0);
    Dataset d;
    d.features = 20;
    for (int i = 0; i < 80; ++i) {
        std::vector<double> x(20);
        for (auto& v : x) v = rng.uniform();
        d.push(x, i % 4);
    }
    RealNetwork net;
    net.layers.emplace_back(8, 21);
    net.layers.emplace_back(4, 9);
    for (auto& l : net.layers)
        for (auto& v : l.data) v = 2 * rng.uniform() - 1;
    const auto q = QuantizedNetwork::from(net);
    EngineSpec spec;
    spec.fit.a = 0.05;
    spec.fit.domain_hi = 1.0;
    CrossbarEngine eng(spec);
    for (Mode m : {Mode::Ideal, Mode::Crossbar, Mode::CrossbarVariation})
        CHECK(infer(d, q, eng, m, Exec::Serial) == infer(d, q, eng, m, Exec::Parallel));
}
