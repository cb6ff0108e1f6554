#pragma once

#include <cstdint>
#include <vector>

#include "dpe/rng.hpp"
#include "dpe/sweeps.hpp"

namespace dpe {

struct VariationSpec {
    Voltage sigma_min = 0.030;
    double w_min_l_min = 1.0;  // area of the minimum device, arbitrary units
    std::uint64_t seed = 1;
    std::size_t trials = 1000;

    void validate() const;
};

/// sigma_min * sqrt(Wmin*Lmin / (W*L)) for a device of the given area.
Voltage sigma_l(const VariationSpec& spec, double device_area);

/// Threshold offset for one device. L is never scaled, so the area is
/// width_multiplier * w_min_l_min. Keyed by (seed, trial, device).
Voltage sample_vt(const VariationSpec& spec, int width_multiplier, std::uint64_t trial, std::uint64_t device);

/// Device numbering used by the sampler: cell k = r*bit_columns + c owns
/// M1 = 2k and M2 = 2k+1.
void apply_variation(CellGrid& cells, const VariationSpec& spec, std::uint64_t trial);

struct MonteCarloScenario {
    CircuitSetup setup;  // parasitics must be none
    std::size_t rows = 16;
    std::vector<Voltage> voltages;
    std::vector<int> weights;

    /// ConfigB, SL at 0 V, RBL clamped at 0.3 V, 16 rows, no line resistance.
    static MonteCarloScenario paper_default();
};

struct MonteCarloPoint {
    Voltage v_in;
    int weight;
    Current nominal;  // variation-free
    Current mean;
    Current std;      // sample standard deviation over trials
};

/// Per-trial group currents of one grid point, in trial order.
std::vector<Current> monte_carlo_trials(const MonteCarloScenario& sc, const VariationSpec& spec, Voltage v_in,
                                        int weight, Exec exec = Exec::Parallel);

std::vector<MonteCarloPoint> monte_carlo_stats(const MonteCarloScenario& sc, const VariationSpec& spec,
                                               Exec exec = Exec::Parallel);

/// Mean and sample std, reduced in index order with compensated sums.
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// std(I) = a*|I| + b*|I|^2.
struct StdVsCurrentFit {
    double a = 0.0;
    double b = 0.0;
    Current domain_lo = 0.0;
    Current domain_hi = 0.0;
    double residual_norm = 0.0;  // L2 over the fitted points
    std::size_t points = 0;

    /// Never negative; |current| is clamped to [0, domain_hi].
    Current eval(Current current) const;
    double rms_residual() const;
};

StdVsCurrentFit fit_std_vs_current(const std::vector<MonteCarloPoint>& points);
StdVsCurrentFit fit_std_vs_current(const std::vector<Current>& currents, const std::vector<Current>& stds);

Current surrogate_noise(Current current, const StdVsCurrentFit& fit, CounterRng& rng);

}  // namespace dpe
