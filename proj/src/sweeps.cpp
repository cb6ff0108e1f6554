#include "dpe/sweeps.hpp"

#include <cmath>

#include "dpe/error.hpp"

namespace dpe {

std::vector<double> linspace_step(double first, double last, double step) {
    if (!(step > 0.0) || last < first) throw InvalidInput("bad sweep range");
    const auto n = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    // Snap to 1e-12 so grid points print as the decimals they stand for.
    for (std::size_t i = 0; i < n; ++i) out[i] = std::round((first + step * static_cast<double>(i)) * 1e12) / 1e12;
    return out;
}

OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("fit needs two or more paired points");
    double sxx = 0.0, sxy = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        mean += y[i];
    }
    if (sxx == 0.0) throw InvalidInput("fit needs a nonzero abscissa");
    mean /= static_cast<double>(y.size());
    const double slope = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_res += (y[i] - slope * x[i]) * (y[i] - slope * x[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    return {slope, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0)};
}

std::vector<Voltage> paper_voltage_grid() { return linspace_step(0.35, 0.675, 0.025); }

Network build_uniform(const CircuitSetup& setup, const UniformScenario& s) {
    ArrayGeometry g;
    g.rows = s.rows;
    g.word_columns = s.word_columns;
    g.active_rows = s.active_rows;
    const std::size_t n_active = s.active_rows.empty() ? s.rows : s.active_rows.size();
    Excitation e;
    e.mode = setup.mode;
    e.v_dd = setup.v_dd;
    e.v_bias = setup.v_bias;
    e.inputs.assign(n_active, s.v_in);
    const auto cells = pack_weights(WeightMatrix(s.rows, s.word_columns, static_cast<std::uint8_t>(s.weight)), g);
    return build_network(g, setup.parasitics, setup.variant, setup.termination, e, cells, setup.device);
}

OperatingPointSolution solve_uniform(const CircuitSetup& setup, const UniformScenario& s) {
    return solve_operating_point(build_uniform(setup, s));
}

Current single_word_current(const CircuitSetup& setup, int weight, Voltage v_in) {
    CircuitSetup flat = setup;
    flat.parasitics = ParasiticSpec::none();
    return solve_uniform(flat, {1, 1, {}, weight, v_in}).columns.groups[0];
}

std::vector<RowScalingPoint> row_scaling_curve(const std::vector<std::size_t>& n_list, const CircuitSetup& setup,
                                               Voltage v_in, Exec exec) {
    const Current i1 = solve_uniform(setup, {1, 1, {}, 15, v_in}).columns.groups[0];
    std::vector<RowScalingPoint> out(n_list.size());
    parallel_for(exec, n_list.size(), [&](std::size_t k) {
        const std::size_t n = n_list[k];
        if (n == 0) throw InvalidInput("row count must be positive");
        const Current i_n = n == 1 ? i1 : solve_uniform(setup, {n, 1, {}, 15, v_in}).columns.groups[0];
        const Current ideal = static_cast<double>(n) * i1;
        out[k] = {n, i_n, ideal, std::abs(i_n - ideal) / std::abs(ideal) * 100.0};
    });
    return out;
}

std::vector<double> LineResPoint::group_error_pct() const {
    std::vector<double> e(ideal.size(), 0.0);
    for (std::size_t g = 0; g < ideal.size(); ++g) {
        const double ref = std::abs(ideal[g]);
        if (ref > 0.0) e[g] = std::abs(solved[g] - ideal[g]) / ref * 100.0;
    }
    return e;
}

std::vector<LineResPoint> line_resistance_error_map(const CircuitSetup& setup, const LineResGrid& grid, Exec exec) {
    struct Job {
        std::size_t active;
        Voltage v;
        int w;
    };
    std::vector<Job> jobs;
    for (auto n : grid.active_rows)
        for (int w : grid.weights)
            for (auto v : grid.voltages) jobs.push_back({n, v, w});

    CircuitSetup flat = setup;
    flat.parasitics = ParasiticSpec::none();
    flat.parasitics.lumped_inactive = setup.parasitics.lumped_inactive;

    std::vector<LineResPoint> out(jobs.size());
    parallel_for(exec, jobs.size(), [&](std::size_t k) {
        const auto& j = jobs[k];
        const UniformScenario s{grid.rows, grid.word_columns, ArrayGeometry::farthest_rows(grid.rows, j.active), j.w, j.v};
        LineResPoint p{j.active, j.v, j.w, {}, {}, 0.0};
        p.ideal = solve_uniform(flat, s).columns.groups;
        p.solved = solve_uniform(setup, s).columns.groups;
        for (double e : p.group_error_pct()) p.error_pct = std::max(p.error_pct, e);
        out[k] = std::move(p);
    });
    return out;
}

}  // namespace dpe
