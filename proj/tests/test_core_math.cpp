#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "phasehom/core_math.hpp"

using namespace phasehom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("quartic well values and derivative", "[core_math]") {
    const auto w = DoubleWell::quartic();
    CHECK(eval_potential(w, 1.0) == 0.0);
    CHECK(eval_potential(w, -1.0) == 0.0);
    CHECK(eval_potential(w, 0.0) == 1.0);
    CHECK_THAT(eval_potential(w, 2.0), WithinAbs(9.0, 1e-15));
    for (double s : {-1.7, -0.3, 0.4, 1.2}) {
        const double fd = (w.value(s + 1e-6) - w.value(s - 1e-6)) / 2e-6;
        CHECK_THAT(eval_potential_derivative(w, s), WithinAbs(fd, 1e-7));
    }
}

TEST_CASE("tabulated well interpolates samples", "[core_math]") {
    const auto w = DoubleWell::tabulated({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}, 0.0);
    CHECK(w.value(-1.0) == 0.0);
    CHECK(w.value(0.0) == 1.0);
    CHECK(w.value(1.0) == 0.0);
    CHECK(w.kind() == DoubleWell::Kind::tabulated);
}

TEST_CASE("profile values", "[core_math]") {
    CHECK(eval_profile(0.0) == 0.0);
    CHECK(eval_profile(0.5) == 1.0);
    CHECK(eval_profile(-0.5) == -1.0);
    CHECK(eval_profile(3.0) == 1.0);
    CHECK(eval_profile(-0.7) == -1.0);
    CHECK_THAT(eval_profile(0.25), WithinAbs(0.79296875, 1e-15));
    for (double t = -0.5; t <= 0.5; t += 0.01) {
        CHECK_THAT(eval_profile(t), WithinAbs(oracle::eta(t), 1e-14));
        CHECK_THAT(eval_profile(-t), WithinAbs(-eval_profile(t), 1e-15));
        CHECK_THAT(TransitionProfile::first_derivative(t), WithinAbs(oracle::eta1(t), 1e-12));
        CHECK_THAT(TransitionProfile::second_derivative(t), WithinAbs(oracle::eta2(t), 1e-12));
    }
}

TEST_CASE("profile is C2 at the junctions", "[core_math]") {
    CHECK_THAT(TransitionProfile::first_derivative(0.5 - 1e-9), WithinAbs(0.0, 1e-12));
    CHECK_THAT(TransitionProfile::second_derivative(0.5 - 1e-9), WithinAbs(0.0, 1e-6));
    CHECK_THAT(TransitionProfile::second_derivative(-0.5 + 1e-9), WithinAbs(0.0, 1e-6));
}

TEST_CASE("C_eta against Gauss-Legendre", "[core_math]") {
    const auto w = DoubleWell::quartic();
    for (double q : {0.0, 0.05, 0.5, 1.0, 3.0}) CHECK_THAT(compute_c_eta(w, q), WithinRel(oracle::c_eta(q), 1e-10));
    CHECK_THROWS_AS(compute_c_eta(w, -0.1), ConfigError);
}

TEST_CASE("Modica-Mortola constant", "[core_math]") {
    const auto w = DoubleWell::quartic();
    CHECK_THAT(modica_mortola_sigma(w, 1.0), WithinRel(8.0 / 3.0, 1e-8));
    CHECK_THAT(modica_mortola_sigma(w, 0.25), WithinRel(4.0 / 3.0, 1e-8));
    CHECK_THROWS_AS(modica_mortola_sigma(w, 0.0), ConfigError);
}
