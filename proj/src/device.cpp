#include "dpe/device.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dpe/error.hpp"

namespace dpe {
namespace {

constexpr int kMaxBisection = 200;
constexpr Current kMatchTolerance = 1e-12;

// Current from terminal a to terminal b of a symmetric NMOS.
inline Current oriented_current(const DeviceParams& p, Voltage v_gate, Voltage v_a, Voltage v_b) {
    if (v_a >= v_b) return mosfet_current(p, v_gate - v_b, v_a - v_b);
    return -mosfet_current(p, v_gate - v_a, v_b - v_a);
}

}  // namespace

void DeviceParams::validate() const {
    const bool ok = vt0 > 0 && k_prime > 0 && w_over_l > 0 && lambda >= 0 &&
                    subthreshold_i0 >= 0 && subthreshold_n > 0 && phi_t > 0 && w_over_l_min > 0;
    if (!ok) throw InvalidInput("device parameters out of range");
}

DeviceParams default_45() { return DeviceParams{}; }

DeviceParams device_profile(const std::string& name) {
    if (name == "default-45") return default_45();
    throw InvalidInput(fmt::format("unknown device profile '{}'", name));
}

Current mosfet_current(const DeviceParams& p, Voltage vgs, Voltage vds) {
    if (!std::isfinite(vgs) || !std::isfinite(vds)) throw InvalidInput("non-finite terminal voltage");
    if (vds <= 0.0) return 0.0;

    const double vov = vgs - p.vt0;
    // The exponential saturates at threshold and stays on as a floor above it,
    // which keeps I(vgs) continuous at vt0 for any width.
    const double size = p.w_over_l / p.w_over_l_min;
    const double gate = vov < 0.0 ? std::exp(vov / (p.subthreshold_n * p.phi_t)) : 1.0;
    const Current sub = p.subthreshold_i0 * size * gate * -std::expm1(-vds / p.phi_t);
    if (vov <= 0.0) return sub;

    const double clm = 1.0 + p.lambda * vds;
    const double beta = p.k_prime * p.w_over_l;
    const Current strong = vds < vov ? beta * (vov * vds - 0.5 * vds * vds) * clm
                                     : 0.5 * beta * vov * vov * clm;
    return strong + sub;
}

ReadStack ReadStack::sized(const DeviceParams& base, int width_multiplier, Voltage v_dd,
                           Voltage dvt_m1, Voltage dvt_m2) {
    ReadStack s{base, base, width_multiplier, v_dd};
    s.m1.w_over_l *= width_multiplier;
    s.m2.w_over_l *= width_multiplier;
    s.m1.vt0 += dvt_m1;
    s.m2.vt0 += dvt_m2;
    return s;
}

StackSolution solve_stack(const ReadStack& s, const StackBias& b) {
    if (!std::isfinite(b.v_sl) || !std::isfinite(b.v_rbl) || !std::isfinite(b.v_rwl))
        throw InvalidInput("non-finite stack bias");
    if (b.v_sl == b.v_rbl) return {0.0, b.v_sl, 0};

    const Voltage v_q = b.data_bit ? s.v_dd : 0.0;
    // f(x) = I_M1(SL->x) - I_M2(x->RBL) is nonincreasing in x; the root lies
    // between the terminal voltages.
    auto mismatch = [&](Voltage x) {
        return oriented_current(s.m1, v_q, b.v_sl, x) - oriented_current(s.m2, b.v_rwl, x, b.v_rbl);
    };
    Voltage lo = std::min(b.v_sl, b.v_rbl);
    Voltage hi = std::max(b.v_sl, b.v_rbl);
    int it = 0;
    for (; it < kMaxBisection; ++it) {
        const Voltage mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mismatch(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const Voltage x = 0.5 * (lo + hi);
    const Current i_m1 = oriented_current(s.m1, v_q, b.v_sl, x);
    const Current i_m2 = oriented_current(s.m2, b.v_rwl, x, b.v_rbl);
    if (!(std::abs(i_m1 - i_m2) <= kMatchTolerance))
        throw SolverError(fmt::format("read-stack bisection did not converge (dI = {:.3e} A)", i_m1 - i_m2),
                          {lo, hi});
    return {0.5 * (i_m1 + i_m2), x, it};
}

SmallSignal stack_small_signal(const ReadStack& s, const StackBias& b, Voltage h) {
    auto at = [&](Voltage dsl, Voltage drbl) {
        StackBias p = b;
        p.v_sl += dsl;
        p.v_rbl += drbl;
        return stack_current(s, p);
    };
    return {(at(h, 0.0) - at(-h, 0.0)) / (2.0 * h), (at(0.0, h) - at(0.0, -h)) / (2.0 * h)};
}

StackLinearization linearize_stack(const ReadStack& s, const StackBias& b, Voltage h) {
    return {stack_current(s, b), stack_small_signal(s, b, h)};
}

}  // namespace dpe
