#include <doctest.h>

#include <cmath>
#include <limits>

#include "fracnls/errors.hpp"
#include "fracnls/model.hpp"

using namespace fracnls;

namespace {

ModelSpec shared_well(double c0) {
    ModelSpec m;
    m.grid = make_grid(1, 200.0, 1024);
    m.potential1.family = PotentialFamily::multi_well_product;
    m.potential1.amplitude = 1.0;
    m.potential1.wells = {Well{{0, 0, 0}, 1.0}};
    m.potential2 = m.potential1;
    m.coupling.family = CouplingFamily::constant_negative;
    m.coupling.c0 = c0;
    m.epsilon = 0.0625;
    return m;
}

bool has_failure(const HypothesisReport& r, const std::string& key) {
    for (const auto& f : r.failures())
        if (f.find(key) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("critical exponent and admissible exponents") {
    CHECK(critical_exponent(3, 0.75) == doctest::Approx(4.0));
    CHECK(std::isinf(critical_exponent(1, 0.5)));
    CHECK(exponents_admissible(1, 0.5, 0.5, 0.5));
    CHECK_FALSE(exponents_admissible(1, 0.5, 0.5, 0.7));  // q > p
    CHECK_FALSE(exponents_admissible(3, 0.75, 1.0, 0.5));  // 2p+2 = 4 is critical
}

TEST_CASE("potential families evaluate their closed forms") {
    PotentialSpec v;
    v.family = PotentialFamily::multi_well_product;
    v.lambda_floor = 1.0;
    v.amplitude = 2.0;
    v.wells = {Well{{0, 0, 0}, 1.0}};
    CHECK(v.evaluate({0, 0, 0}) == doctest::Approx(1.0));
    CHECK(v.value_at_infinity() == doctest::Approx(3.0));
    v.family = PotentialFamily::decaying_well;
    CHECK(v.value_at_infinity() == doctest::Approx(1.0));
    CHECK(v.evaluate({0, 0, 0}) == doctest::Approx(1.0));
    CHECK(v.evaluate({50, 0, 0}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("hypotheses pass on the shared-well instance") {
    const auto m = shared_well(0.1);
    const auto rep = check_hypotheses(m, default_localization(m));
    CHECK(rep.all_passed());
    CHECK(rep.shared_minima == 1);
}

TEST_CASE("positive coupling is rejected") {
    auto m = shared_well(0.1);
    m.coupling.c0 = -0.1;  // beta = +0.1
    const auto loc = default_localization(m);
    const auto rep = check_hypotheses(m, loc);
    CHECK(has_failure(rep, "c0 must be nonnegative"));
    CHECK_FALSE(has_failure(rep, "D3"));
    CHECK_THROWS_AS(validate_hypotheses(m, loc), Error);
}

TEST_CASE("vanishing coupling at a declared shared minimum violates D4") {
    auto m = shared_well(0.1);
    m.coupling.family = CouplingFamily::zero;
    const auto rep = check_hypotheses(m, default_localization(m));
    CHECK(has_failure(rep, "D4"));
}

TEST_CASE("a flat potential with declared wells violates D2 isolation") {
    auto m = shared_well(0.1);
    m.potential1.amplitude = 0.0;
    const auto rep = check_hypotheses(m, default_localization(m));
    CHECK(has_failure(rep, "D2 isolation z_1,1"));
    CHECK_FALSE(has_failure(rep, "D2 isolation z_2,1"));
}

TEST_CASE("default localization for separated wells") {
    ModelSpec m = shared_well(0.2);
    m.potential1.wells.push_back(Well{{6.0, 0, 0}, 1.0});
    const auto loc = default_localization(m);
    CHECK(loc.r0 == doctest::Approx(3.0));
    CHECK(loc.cube_half_width == doctest::Approx(1.5));
    CHECK(loc.shared_minima_count == 1);
    REQUIRE(loc.pairs.size() == 2);
    CHECK(loc.pairs[0] == std::make_pair(1, 1));
    CHECK(loc.pairs[1] == std::make_pair(2, 1));
    CHECK(loc.c0 == doctest::Approx(0.2));
}

TEST_CASE("constant potentials localize at the origin") {
    ModelSpec m;
    m.grid = make_grid(1, 50.0, 256);
    const auto loc = default_localization(m);
    REQUIRE(loc.pairs.size() == 1);
    CHECK(loc.shared_minima_count == 1);
}

TEST_CASE("model validation rejects bad parameters") {
    auto m = shared_well(0.1);
    m.alpha = 1.2;
    CHECK_THROWS_AS(m.validate(), Error);
    m = shared_well(0.1);
    m.epsilon = 0.0;
    CHECK_THROWS_AS(m.validate(), Error);
    m = shared_well(0.1);
    m.mu1 = -1.0;
    CHECK_THROWS_AS(m.validate(), Error);
}
