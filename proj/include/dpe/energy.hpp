#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpe/units.hpp"

namespace dpe {

/// Per-event costs. The shipped defaults are estimates, not measured data.
struct EnergyParams {
    Energy e_adc = 10e-12;
    Energy e_dac = 1e-12;
    Energy e_array_access = 5e-12;
    Energy e_mac_digital = 0.5e-12;
    Energy e_mem_read = 1.5e-12;
    Time t_adc = 10e-9;
    Time t_mac = 1e-9;
    std::size_t n_adcs = 16;
    Current em_ceiling = 10e-3;  // per-line current above which a warning is raised
    Voltage v_dd = 0.65;

    void validate() const;
};

struct WorkloadSpec {
    std::size_t rows = 16;
    std::size_t words = 16;
    int bits = 4;
};

struct EnergyBreakdown {
    Energy dac = 0.0;
    Energy adc = 0.0;
    Energy analog = 0.0;
    Energy array = 0.0;
    Time time = 0.0;

    Energy total() const { return dac + adc + analog + array; }
    double peripheral_share() const;  // (dac + adc) / total
};

/// group_currents: one solved current per word column (sign ignored).
EnergyBreakdown dpe_energy(const WorkloadSpec& w, const EnergyParams& p, const std::vector<Current>& group_currents);

struct DigitalCost {
    Energy energy = 0.0;
    Time time = 0.0;
};

DigitalCost digital_energy(const WorkloadSpec& w, const EnergyParams& p);

/// Lines whose current magnitude exceeds p.em_ceiling.
std::vector<std::size_t> electromigration_warnings(const EnergyParams& p, const std::vector<Current>& line_currents);

}  // namespace dpe
