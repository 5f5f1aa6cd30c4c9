#include <doctest.h>

#include "dicsim/params.hpp"

using namespace dicsim;

TEST_CASE("winding factor from turns counts") {
    CHECK(delta_from_turns({3, 2, 1}) == doctest::Approx(5.0));
    CHECK(delta_from_turns({1, 2, 1}) == doctest::Approx(3.0));
    CHECK(delta_from_turns({2, 3, 1}) == doctest::Approx(2.5));
}

TEST_CASE("degenerate winding factor rejected") {
    CHECK_THROWS_WITH_AS(delta_from_turns({3, 2, 2}),
                         doctest::Contains("degenerate winding factor"),
                         std::domain_error);
    CHECK_THROWS_AS(delta_from_turns({3, 1, 2}), std::domain_error);
    CHECK_THROWS_AS(delta_from_turns({0, 2, 1}), std::domain_error);
}

TEST_CASE("winding factor is scale invariant") {
    const TurnsRatio bases[] = {{3, 2, 1}, {1, 2, 1}, {2, 3, 1}, {5, 4, 2}, {1, 12, 11}};
    for (const TurnsRatio& t : bases) {
        const double d0 = delta_from_turns(t);
        for (int k = 2; k <= 8; ++k) {
            TurnsRatio scaled{k * t.n1, k * t.n2, k * t.n3};
            CHECK(delta_from_turns(scaled) == doctest::Approx(d0).epsilon(1e-15));
        }
    }
}

TEST_CASE("bench defaults validate cleanly") {
    CircuitSpec spec;
    std::vector<std::string> warnings;
    CHECK_NOTHROW(validate(spec, &warnings));
    CHECK(warnings.empty());
}

TEST_CASE("validation collects every violation") {
    CircuitSpec spec;
    spec.turns = {3, 2, 2};
    spec.fsw = 0.0;
    spec.c1 = -1.0;
    try {
        validate(spec);
        FAIL("expected ValidationError");
    } catch (const ValidationError& ex) {
        CHECK(ex.violations().size() == 3);
        bool saw_turns = false, saw_fsw = false;
        for (const auto& v : ex.violations()) {
            if (v.field == "turns") {
                saw_turns = true;
                CHECK(v.message.find("degenerate winding factor") != std::string::npos);
            }
            if (v.field == "fsw") {
                saw_fsw = true;
                CHECK(v.message.find("non-positive frequency") != std::string::npos);
            }
        }
        CHECK(saw_turns);
        CHECK(saw_fsw);
    }
}

TEST_CASE("validate is idempotent") {
    CircuitSpec spec;
    spec.load = LoadSpec::power(25.0);
    const CircuitSpec once = validate(spec);
    const CircuitSpec twice = validate(once);
    CHECK(once.vin1 == twice.vin1);
    CHECK(once.lm == twice.lm);
    CHECK(once.load.value == twice.load.value);
    CHECK(once.turns.n1 == twice.turns.n1);
}

TEST_CASE("swapped source assignment warns but passes") {
    CircuitSpec spec;
    spec.vin1 = 24.0;
    spec.vin2 = 12.0;
    std::vector<std::string> warnings;
    CHECK_NOTHROW(validate(spec, &warnings));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("vin1 >= vin2") != std::string::npos);
}

TEST_CASE("ideal() zeroes every loss parameter only") {
    CircuitSpec spec;
    const CircuitSpec ideal = spec.ideal();
    CHECK(ideal.r_src1 == 0.0);
    CHECK(ideal.r_src2 == 0.0);
    CHECK(ideal.esr_l1 == 0.0);
    CHECK(ideal.esr_l2 == 0.0);
    CHECK(ideal.esr_lm == 0.0);
    CHECK(ideal.v_diode == 0.0);
    CHECK(ideal.k_ovl == 0.0);
    CHECK(ideal.p_gate == 0.0);
    CHECK(ideal.l1 == spec.l1);
    CHECK(ideal.c2 == spec.c2);
    CHECK(ideal.turns.n3 == spec.turns.n3);
}

TEST_CASE("load resolves to resistance either way") {
    CHECK(LoadSpec::resistance(92.16).resistance_at(48.0) == doctest::Approx(92.16));
    CHECK(LoadSpec::power(25.0).resistance_at(48.0) == doctest::Approx(92.16));
    CHECK(LoadSpec::power(10.0).resistance_at(48.0) == doctest::Approx(230.4));
}
