#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpe/energy.hpp"
#include "dpe/network.hpp"

namespace dpe {

inline constexpr int kSchemaVersion = 1;

struct RangeSpec {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

/// Bias and readout for one excitation mode.
struct ModeSettings {
    Voltage v_bias = 0.0;    // SL level when the inputs drive the RWL
    Voltage v_max = 0.22;    // top of the input range
    IdealOpamp opamp;
    SenseResistor sense;
};

struct IvSweepConfig {
    std::vector<int> weights{15, 10, 4, 0};
    RangeSpec config_a{0.0, 0.30, 0.01};
    RangeSpec config_b{0.30, 0.65, 0.01};
};

struct WeightSweepConfig {
    std::vector<double> config_a{0.05, 0.10, 0.15};
    std::vector<double> config_b{0.50, 0.55, 0.60};
};

struct RowScalingConfig {
    std::vector<std::size_t> n{1, 8, 16, 32, 64};
};

struct LineResConfig {
    std::size_t rows = 64;
    std::size_t word_columns = 32;
    std::vector<std::size_t> active_rows{16, 8};
    std::size_t tap_every = 16;
    RangeSpec config_a_voltages{0.12, 0.22, 0.02};
    RangeSpec config_b_voltages{0.35, 0.675, 0.025};
    std::vector<int> weights{1, 4, 8, 12, 15};
    /// Any of config_a_single_end, config_b_single_end, config_b_both_ends, config_b_tapped.
    std::vector<std::string> map_variants{"config_a_single_end", "config_b_tapped"};
};

struct MonteCarloConfig {
    Voltage sigma_min = 0.030;
    std::size_t trials = 1000;
    std::size_t rows = 16;
    RangeSpec voltages{0.35, 0.675, 0.025};
    std::vector<int> weights{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
};

struct NnConfig {
    std::string dataset;       // empty = bundled digit set
    std::string weights_file;  // empty = train
    std::size_t hidden = 32;
    std::size_t epochs = 60;
    double learning_rate = 0.05;
    std::size_t tile_rows = 16;
    int adc_bits = 8;
    Voltage v_low = 0.10;
    Voltage v_high = 0.22;
    Voltage sigma_min = 0.030;
    std::size_t variation_trials = 200;
    Voltage variation_voltage_step = 0.01;
};

struct EnergyConfig {
    std::string params_file;  // empty = built-in estimates
    EnergyParams params;
    std::size_t rows = 16;
    std::size_t words = 16;
    std::size_t samples = 4;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 1;
    std::string device_profile = "default-45";
    DeviceParams device = default_45();
    Voltage v_dd = 0.65;
    ParasiticSpec parasitics{1.25, 2.5, 1.3, true};
    ModeSettings config_a{0.0, 0.22, IdealOpamp{0.1}, SenseResistor{50.0, 0.0}};
    ModeSettings config_b{0.0, 0.65, IdealOpamp{0.3}, SenseResistor{50.0, 0.3}};
    IvSweepConfig iv_sweep;
    WeightSweepConfig weight_sweep;
    RowScalingConfig row_scaling;
    LineResConfig lineres_map;
    MonteCarloConfig montecarlo;
    NnConfig nn;
    EnergyConfig energy;

    /// Directory relative paths inside the config are resolved against.
    std::string base_dir = ".";

    void validate() const;
};

/// Missing keys keep their defaults; unknown keys and type mismatches throw
/// InvalidConfig naming the offending path.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Every field, canonical key order.
std::string resolved_config_json(const ExperimentConfig& c);

EnergyParams parse_energy_params(const std::string& json_text);
EnergyParams load_energy_params(const std::string& path);
std::string energy_params_json(const EnergyParams& p);

/// Absolute, or relative to base_dir.
std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace dpe
