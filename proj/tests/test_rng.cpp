#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "dpe/rng.hpp"

using namespace dpe;

// Known-answer vectors published with the reference Philox implementation.
TEST_CASE("philox4x32-10 known answers") {
    const PhiloxCounter zero{0, 0, 0, 0};
    CHECK(philox4x32_10(zero, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});

    const PhiloxCounter ones{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff};
    CHECK(philox4x32_10(ones, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});

    const PhiloxCounter pi{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344};
    CHECK(philox4x32_10(pi, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed draws depend only on their key") {
    CHECK(keyed_normal(5, 3, 9) == keyed_normal(5, 3, 9));
    CHECK(keyed_normal(5, 3, 9) != keyed_normal(5, 9, 3));
    CHECK(keyed_normal(5, 3, 9) != keyed_normal(6, 3, 9));
    std::set<double> seen;
    for (std::uint64_t b = 0; b < 1000; ++b) seen.insert(keyed_uniform(1, 0, b));
    CHECK(seen.size() == 1000);
}

TEST_CASE("uniforms lie in [0, 1) and normals have unit moments") {
    const int n = 200000;
    double s = 0.0, s2 = 0.0, umin = 1.0, umax = 0.0;
    CounterRng u(11, 0), g(11, 1);
    for (int i = 0; i < n; ++i) {
        const double x = u.uniform();
        umin = std::min(umin, x);
        umax = std::max(umax, x);
        const double z = g.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("counter stream advances once per draw") {
    CounterRng r(3, 4);
    CHECK(r.position() == 0);
    const double a = r.normal();
    (void)r.uniform();
    CHECK(r.position() == 2);
    CHECK(a == keyed_normal(3, 4, 0));
}

TEST_CASE("compensated sum keeps increments below the ulp of the total") {
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-12));

    double naive = 1.0;
    for (int i = 0; i < 1000000; ++i) naive += 1e-16;
    CHECK(naive == 1.0);
}
