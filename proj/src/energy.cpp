#include "dpe/energy.hpp"

#include <cmath>

#include "dpe/error.hpp"
#include "dpe/rng.hpp"

namespace dpe {

void EnergyParams::validate() const {
    for (double v : {e_adc, e_dac, e_array_access, e_mac_digital, e_mem_read, t_adc, t_mac, em_ceiling, v_dd})
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidConfig("energy parameters must be finite and >= 0");
    if (n_adcs == 0) throw InvalidConfig("n_adcs must be positive");
}

double EnergyBreakdown::peripheral_share() const {
    const Energy t = total();
    return t > 0.0 ? (dac + adc) / t : 0.0;
}

EnergyBreakdown dpe_energy(const WorkloadSpec& w, const EnergyParams& p, const std::vector<Current>& group_currents) {
    p.validate();
    EnergyBreakdown b;
    b.dac = static_cast<double>(w.rows) * p.e_dac;
    b.adc = static_cast<double>(w.words) * p.e_adc;
    CompensatedSum analog;
    for (Current i : group_currents) analog.add(std::abs(i) * p.v_dd * p.t_adc);
    b.analog = analog.value();
    b.array = p.e_array_access;
    // Conversions beyond the available ADCs take extra rounds.
    const std::size_t rounds = w.words == 0 ? 0 : (w.words + p.n_adcs - 1) / p.n_adcs;
    b.time = static_cast<double>(rounds) * p.t_adc;
    return b;
}

DigitalCost digital_energy(const WorkloadSpec& w, const EnergyParams& p) {
    p.validate();
    const double ops = static_cast<double>(w.rows) * static_cast<double>(w.words);
    return {ops * (p.e_mem_read + p.e_mac_digital), ops * p.t_mac};
}

std::vector<std::size_t> electromigration_warnings(const EnergyParams& p, const std::vector<Current>& line_currents) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < line_currents.size(); ++i)
        if (std::abs(line_currents[i]) > p.em_ceiling) out.push_back(i);
    return out;
}

}  // namespace dpe
