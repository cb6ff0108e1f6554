#pragma once

#include <cstddef>
#include <vector>

#include "dpe/network.hpp"
#include "dpe/parallel.hpp"

namespace dpe {

/// Everything about a circuit except its stored weights and input values.
struct CircuitSetup {
    DeviceParams device = default_45();
    Voltage v_dd = 0.65;
    DriveMode mode = DriveMode::ConfigA;
    Voltage v_bias = 0.0;
    ParasiticSpec parasitics = ParasiticSpec::none();
    SlDriveVariant variant = SingleEnd{};
    Termination termination = IdealOpamp{};
};

/// Every active row at v_in, every word at `weight`. Rows listed in
/// `active_rows` (empty = all) are driven, the rest idle.
struct UniformScenario {
    std::size_t rows = 1;
    std::size_t word_columns = 1;
    std::vector<std::size_t> active_rows;
    int weight = 15;
    Voltage v_in = 0.0;
};

Network build_uniform(const CircuitSetup& setup, const UniformScenario& s);
OperatingPointSolution solve_uniform(const CircuitSetup& setup, const UniformScenario& s);

/// Group current of a single 4-bit word in a single row.
Current single_word_current(const CircuitSetup& setup, int weight, Voltage v_in);

struct RowScalingPoint {
    std::size_t n;
    Current i_n;
    Current n_times_i1;
    double deviation_pct;
};

/// Worst-case pattern (all '1111', all inputs at v_in) on N fully active rows.
std::vector<RowScalingPoint> row_scaling_curve(const std::vector<std::size_t>& n_list, const CircuitSetup& setup,
                                               Voltage v_in, Exec exec = Exec::Parallel);

struct LineResPoint {
    std::size_t active_rows;
    Voltage v_in;
    int weight;
    std::vector<Current> ideal;   // per group, same scenario without line resistance
    std::vector<Current> solved;  // per group, with line resistance
    double error_pct;             // worst group

    /// |solved - ideal| / |ideal| * 100 per group; 0 where ideal is exactly 0.
    std::vector<double> group_error_pct() const;
};

struct LineResGrid {
    std::size_t rows = 64;
    std::size_t word_columns = 32;
    std::vector<Voltage> voltages;
    std::vector<int> weights;
    std::vector<std::size_t> active_rows{16, 8};
};

/// Error of the parasitic solve against the parasitic-free solve of the same
/// uniform scenario, with the active rows farthest from the termination.
std::vector<LineResPoint> line_resistance_error_map(const CircuitSetup& setup, const LineResGrid& grid,
                                                    Exec exec = Exec::Parallel);

struct OriginFit {
    double slope;
    double r2;  // centered: 1 - SS_res / sum (y - mean y)^2
};

/// Least-squares y = slope * x.
OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

/// 0.35 V to 0.675 V in 25 mV steps.
std::vector<Voltage> paper_voltage_grid();

/// Evenly spaced [first, last] with the given step, robust to rounding.
std::vector<double> linspace_step(double first, double last, double step);

}  // namespace dpe
