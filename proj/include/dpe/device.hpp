#pragma once

#include <string>
#include <vector>

#include "dpe/units.hpp"

namespace dpe {

/// Behavioral NMOS parameters. Strong inversion follows the square law with
/// channel-length modulation; below threshold the current is exponential in
/// Vgs with the I0 prefactor referenced to a minimum-size device.
struct DeviceParams {
    Voltage vt0 = 0.4;
    double k_prime = 300e-6;        // A/V^2
    double w_over_l = 2.0;
    double lambda = 0.1;            // 1/V
    Current subthreshold_i0 = 1e-12;
    double subthreshold_n = 1.5;
    Voltage phi_t = 0.02585;
    double w_over_l_min = 2.0;      // size at which subthreshold_i0 is quoted

    /// Throws InvalidInput when any field is outside its physical range.
    void validate() const;
};

/// The shipped "default-45" profile.
DeviceParams default_45();

/// Looks up a built-in profile by name; throws InvalidInput if unknown.
DeviceParams device_profile(const std::string& name);

/// Drain current for vds >= 0 (source is the lower-potential terminal).
Current mosfet_current(const DeviceParams& p, Voltage vgs, Voltage vds);

/// Two-transistor decoupled read port: M1 gated by the stored bit and tied to
/// the SL, M2 gated by the RWL and tied to the RBL. width_multiplier scales the
/// W/L of both devices.
struct ReadStack {
    DeviceParams m1;
    DeviceParams m2;
    int width_multiplier = 1;
    Voltage v_dd = 0.65;  // storage-node high level driving M1's gate

    /// Stack built from one base device; vt offsets model per-device mismatch.
    static ReadStack sized(const DeviceParams& base, int width_multiplier, Voltage v_dd,
                           Voltage dvt_m1 = 0.0, Voltage dvt_m2 = 0.0);
};

struct StackBias {
    Voltage v_sl = 0.0;
    Voltage v_rbl = 0.0;
    Voltage v_rwl = 0.0;
    bool data_bit = false;
};

struct StackSolution {
    Current current = 0.0;     // signed, positive flowing SL -> RBL
    Voltage v_internal = 0.0;  // node between M1 and M2
    int iterations = 0;
};

/// Bisection on the internal node until the M1 and M2 currents agree.
/// Throws SolverError (history = final bracket) if they cannot be matched.
StackSolution solve_stack(const ReadStack& s, const StackBias& bias);

inline Current stack_current(const ReadStack& s, const StackBias& bias) {
    return solve_stack(s, bias).current;
}

struct SmallSignal {
    Conductance d_sl;   // dI/dV_sl
    Conductance d_rbl;  // dI/dV_rbl
};

/// Central finite differences of stack_current.
SmallSignal stack_small_signal(const ReadStack& s, const StackBias& bias, Voltage step = 1e-6);

/// Both the current and its terminal derivatives in one call.
struct StackLinearization {
    Current current;
    SmallSignal g;
};
StackLinearization linearize_stack(const ReadStack& s, const StackBias& bias, Voltage step = 1e-6);

}  // namespace dpe
