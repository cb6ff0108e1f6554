#include "dpe/variation.hpp"

#include <algorithm>
#include <cmath>

#include "dpe/error.hpp"

namespace dpe {

void VariationSpec::validate() const {
    if (!(sigma_min >= 0.0) || !std::isfinite(sigma_min)) throw InvalidConfig("sigma_min must be >= 0");
    if (!(w_min_l_min > 0.0)) throw InvalidConfig("w_min_l_min must be positive");
    if (trials < 1) throw InvalidConfig("trials must be >= 1");
}

Voltage sigma_l(const VariationSpec& spec, double device_area) {
    if (!(device_area > 0.0)) throw InvalidInput("device area must be positive");
    return spec.sigma_min * std::sqrt(spec.w_min_l_min / device_area);
}

Voltage sample_vt(const VariationSpec& spec, int width_multiplier, std::uint64_t trial, std::uint64_t device) {
    if (spec.sigma_min == 0.0) return 0.0;
    const double area = static_cast<double>(width_multiplier) * spec.w_min_l_min;
    return sigma_l(spec, area) * keyed_normal(spec.seed, trial, device);
}

void apply_variation(CellGrid& cells, const VariationSpec& spec, std::uint64_t trial) {
    for (std::size_t r = 0; r < cells.rows(); ++r)
        for (std::size_t c = 0; c < cells.bit_columns(); ++c) {
            auto& cell = cells.at(r, c);
            const std::uint64_t k = r * cells.bit_columns() + c;
            cell.dvt_m1 += sample_vt(spec, cell.width, trial, 2 * k);
            cell.dvt_m2 += sample_vt(spec, cell.width, trial, 2 * k + 1);
        }
}

MonteCarloScenario MonteCarloScenario::paper_default() {
    MonteCarloScenario sc;
    sc.setup.mode = DriveMode::ConfigB;
    sc.setup.v_bias = 0.0;
    sc.setup.termination = IdealOpamp{0.3};
    sc.voltages = paper_voltage_grid();
    for (int w = 1; w <= kMaxWeightLevel; ++w) sc.weights.push_back(w);
    return sc;
}

namespace {

struct PreparedPoint {
    ArrayGeometry g;
    Excitation e;
    CellGrid nominal;
};

PreparedPoint prepare(const MonteCarloScenario& sc, Voltage v_in, int weight) {
    if (weight < 0 || weight > kMaxWeightLevel) throw InvalidInput("weight level out of range");
    PreparedPoint p;
    p.g.rows = sc.rows;
    p.g.word_columns = 1;
    p.e.mode = sc.setup.mode;
    p.e.v_dd = sc.setup.v_dd;
    p.e.v_bias = sc.setup.v_bias;
    p.e.inputs.assign(sc.rows, v_in);
    p.nominal = pack_weights(WeightMatrix(sc.rows, 1, static_cast<std::uint8_t>(weight)), p.g);
    return p;
}

Current solve_cells(const MonteCarloScenario& sc, const PreparedPoint& p, const CellGrid& cells) {
    const auto net = build_network(p.g, sc.setup.parasitics, sc.setup.variant, sc.setup.termination, p.e, cells,
                                   sc.setup.device);
    return solve_operating_point(net).columns.groups[0];
}

}  // namespace

std::vector<Current> monte_carlo_trials(const MonteCarloScenario& sc, const VariationSpec& spec, Voltage v_in,
                                        int weight, Exec exec) {
    spec.validate();
    const auto p = prepare(sc, v_in, weight);
    std::vector<Current> out(spec.trials);
    parallel_for(exec, spec.trials, [&](std::size_t t) {
        CellGrid cells = p.nominal;
        apply_variation(cells, spec, t);
        out[t] = solve_cells(sc, p, cells);
    });
    return out;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) throw InvalidInput("empty sample");
    // Shifted by the first sample, so identical samples give exactly zero spread.
    const double x0 = xs.front();
    CompensatedSum s;
    for (double x : xs) s.add(x - x0);
    const double offset = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return {x0, 0.0};
    CompensatedSum q;
    for (double x : xs) q.add((x - x0 - offset) * (x - x0 - offset));
    return {x0 + offset, std::sqrt(q.value() / static_cast<double>(xs.size() - 1))};
}

std::vector<MonteCarloPoint> monte_carlo_stats(const MonteCarloScenario& sc, const VariationSpec& spec, Exec exec) {
    if (sc.setup.parasitics.r_bl_per_cell != 0.0 || sc.setup.parasitics.r_sl_per_cell != 0.0)
        throw InvalidConfig("Monte Carlo statistics are parasitic-free");
    std::vector<MonteCarloPoint> out;
    for (int w : sc.weights)
        for (Voltage v : sc.voltages) {
            const auto p = prepare(sc, v, w);
            const Current nominal = solve_cells(sc, p, p.nominal);
            const auto [mean, sd] = mean_std(monte_carlo_trials(sc, spec, v, w, exec));
            out.push_back({v, w, nominal, mean, sd});
        }
    return out;
}

Current StdVsCurrentFit::eval(Current current) const {
    const double x = std::min(std::abs(current), domain_hi);
    return std::max(0.0, a * x + b * x * x);
}

double StdVsCurrentFit::rms_residual() const {
    return points ? residual_norm / std::sqrt(static_cast<double>(points)) : 0.0;
}

StdVsCurrentFit fit_std_vs_current(const std::vector<Current>& currents, const std::vector<Current>& stds) {
    if (currents.size() != stds.size()) throw InvalidInput("fit inputs differ in length");
    if (currents.size() < 10) throw InvalidInput("fit needs at least 10 points");
    StdVsCurrentFit f;
    f.points = currents.size();
    f.domain_lo = std::abs(currents[0]);
    for (double c : currents) {
        f.domain_lo = std::min(f.domain_lo, std::abs(c));
        f.domain_hi = std::max(f.domain_hi, std::abs(c));
    }
    const bool all_zero = std::all_of(stds.begin(), stds.end(), [](double s) { return s == 0.0; });
    if (all_zero || f.domain_hi == 0.0) return f;

    // Normal equations in scaled units: x = |I|/domain_hi keeps them well conditioned.
    const double h = f.domain_hi;
    CompensatedSum s2, s3, s4, sy1, sy2;
    for (std::size_t i = 0; i < currents.size(); ++i) {
        const double x = std::abs(currents[i]) / h;
        s2.add(x * x);
        s3.add(x * x * x);
        s4.add(x * x * x * x);
        sy1.add(x * stds[i]);
        sy2.add(x * x * stds[i]);
    }
    const double det = s2.value() * s4.value() - s3.value() * s3.value();
    double ua, ub;
    if (std::abs(det) <= 1e-300 * std::max(1.0, s4.value())) {
        // Only a single distinct |I|: the linear term alone.
        ua = sy1.value() / s2.value();
        ub = 0.0;
    } else {
        ua = (sy1.value() * s4.value() - sy2.value() * s3.value()) / det;
        ub = (s2.value() * sy2.value() - s3.value() * sy1.value()) / det;
    }
    f.a = ua / h;
    f.b = ub / (h * h);
    CompensatedSum r;
    for (std::size_t i = 0; i < currents.size(); ++i) {
        const double x = std::abs(currents[i]);
        const double e = f.a * x + f.b * x * x - stds[i];
        r.add(e * e);
    }
    f.residual_norm = std::sqrt(r.value());
    return f;
}

StdVsCurrentFit fit_std_vs_current(const std::vector<MonteCarloPoint>& points) {
    std::vector<Current> c, s;
    for (const auto& p : points) {
        c.push_back(p.mean);
        s.push_back(p.std);
    }
    return fit_std_vs_current(c, s);
}

Current surrogate_noise(Current current, const StdVsCurrentFit& fit, CounterRng& rng) {
    const double s = fit.eval(current);
    const double z = rng.normal();  // drawn regardless so streams stay aligned
    return current + s * z;
}

}  // namespace dpe
