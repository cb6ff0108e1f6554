#pragma once

#include <array>
#include <cstdint>

namespace dpe {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
/// pure function of (counter, key): any trial or device can be drawn
/// independently of evaluation order.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Standard normal keyed by (seed, a, b). Box-Muller over one Philox block.
double keyed_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Uniform in [0, 1) keyed by (seed, a, b).
double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Sequential view over a keyed stream: draw n is keyed_normal(seed, stream, n).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double normal() { return keyed_normal(seed_, stream_, counter_++); }
    double uniform() { return keyed_uniform(seed_, stream_, counter_++); }
    std::uint64_t position() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace dpe
