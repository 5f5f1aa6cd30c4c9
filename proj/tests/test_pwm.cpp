#include <doctest.h>

#include <cmath>
#include <set>

#include "dicsim/pwm.hpp"

using namespace dicsim;

TEST_CASE("sawtooth carrier") {
    CHECK(carrier(0.0, 20e3) == doctest::Approx(0.0));
    CHECK(carrier(25e-6, 20e3) == doctest::Approx(0.5));
    CHECK(carrier(75e-6, 20e3) == doctest::Approx(0.5));  // periodic
    for (double t : {1e-6, 13e-6, 49.9e-6}) {
        const double c = carrier(t, 20e3);
        CHECK(c >= 0.0);
        CHECK(c < 1.0);
    }
}

TEST_CASE("comparator gates, leading-edge aligned") {
    const PwmConfig cfg{20e3, 0.15, 0.5};
    const double period = 1.0 / cfg.fsw;
    // carrier = 0.10: both on
    GatePair g = gates_at(0.10 * period, cfg);
    CHECK(g.sw1);
    CHECK(g.sw2);
    // carrier = 0.30: only the boost channel
    g = gates_at(0.30 * period, cfg);
    CHECK_FALSE(g.sw1);
    CHECK(g.sw2);
    // carrier = 0.90: both off
    g = gates_at(0.90 * period, cfg);
    CHECK_FALSE(g.sw1);
    CHECK_FALSE(g.sw2);
}

TEST_CASE("strict comparison endpoints") {
    const PwmConfig off{20e3, 0.0, 0.0};
    const PwmConfig on{20e3, 1.0, 1.0};
    for (double t : {0.0, 12.5e-6, 49.99e-6}) {
        CHECK_FALSE(gates_at(t, off).sw1);
        CHECK(gates_at(t, on).sw2);
    }
}

TEST_CASE("mode classification covers all four gate pairs") {
    CHECK(mode_of({true, false}) == OperatingMode::Mode1);
    CHECK(mode_of({true, true}) == OperatingMode::Mode2);
    CHECK(mode_of({false, true}) == OperatingMode::Mode3);
    CHECK(mode_of({false, false}) == OperatingMode::Mode4);

    // total bijection over the four pairs
    std::set<OperatingMode> seen;
    for (bool a : {false, true})
        for (bool b : {false, true}) seen.insert(mode_of({a, b}));
    CHECK(seen.size() == 4);
}

TEST_CASE("switching edges within one period") {
    const double period = 50e-6;
    auto edges = edges_in_period({20e3, 0.15, 0.5});
    REQUIRE(edges.size() == 4);
    CHECK(edges[0] == 0.0);
    CHECK(edges[1] == doctest::Approx(7.5e-6));
    CHECK(edges[2] == doctest::Approx(25e-6));
    CHECK(edges[3] == doctest::Approx(period));

    auto dedup = edges_in_period({20e3, 0.5, 0.5});
    REQUIRE(dedup.size() == 3);
    CHECK(dedup[1] == doctest::Approx(25e-6));

    auto idle = edges_in_period({20e3, 0.0, 0.0});
    REQUIRE(idle.size() == 2);
    CHECK(idle[0] == 0.0);
    CHECK(idle[1] == doctest::Approx(period));
}

TEST_CASE("edges are sorted and strictly increasing") {
    for (double d1 : {0.0, 0.1, 0.33, 0.5, 0.99, 1.0})
        for (double d2 : {0.0, 0.1, 0.33, 0.5, 0.99, 1.0}) {
            auto edges = edges_in_period({20e3, d1, d2});
            for (std::size_t i = 1; i < edges.size(); ++i)
                CHECK(edges[i] > edges[i - 1]);
        }
}

TEST_CASE("on-time recovered exactly from the edge list") {
    // the comparator on-interval is [0, d*T); summing segments whose
    // midpoint satisfies the comparator recovers d*T exactly
    for (double d1 : {0.0, 0.15, 0.4, 0.85})
        for (double d2 : {0.0, 0.25, 0.5, 1.0}) {
            const PwmConfig cfg{20e3, d1, d2};
            const double period = 1.0 / cfg.fsw;
            auto edges = edges_in_period(cfg);
            double on1 = 0.0, on2 = 0.0;
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
                const double mid = 0.5 * (edges[i] + edges[i + 1]);
                if (mid < d1 * period) on1 += edges[i + 1] - edges[i];
                if (mid < d2 * period) on2 += edges[i + 1] - edges[i];
            }
            CHECK(on1 == doctest::Approx(d1 * period).epsilon(1e-14));
            CHECK(on2 == doctest::Approx(d2 * period).epsilon(1e-14));
        }
}

TEST_CASE("shared carrier nests the on-intervals") {
    // with d1 <= d2 the channel-1 on-interval is a subset of channel 2's
    const PwmConfig cfg{20e3, 0.2, 0.6};
    for (int i = 0; i < 1000; ++i) {
        const double t = i * 1.37e-7;
        const GatePair g = gates_at(t, cfg);
        if (g.sw1) CHECK(g.sw2);
    }
}
