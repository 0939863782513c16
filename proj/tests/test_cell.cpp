#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "phasehom/phasehom.hpp"

using namespace phasehom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EnvironmentSpec checkerboard(std::uint64_t seed) {
    EnvironmentSpec s;
    s.kind = EnvironmentKind::checkerboard;
    s.a = {0.8, 1.2};
    s.b = {-0.04, 0.05};
    s.c = {0.8, 1.2};
    s.q = 0.05;
    s.c1 = 0.8;
    s.c2 = 1.2;
    s.seed = seed;
    return s;
}

SigmaConfig quick_sigma() {
    SigmaConfig sc;
    sc.h = 1.0 / 64.0;
    sc.epsilon_grid = {0.25, 0.125, 0.0625};
    return sc;
}

}  // namespace

TEST_CASE("short cuboids fall back to the profile bound", "[cell]") {
    const auto spec = checkerboard(1);
    Environment<2> env(spec);
    const LatticeCuboid<2> t({{{0.0, 0.5}}}, Direction<2>::axis());
    const auto mu = mu_nu(env, t, CellConfig{});
    CHECK(mu.fallback);
    CHECK_THAT(mu.value, WithinRel(spec.c2 * oracle::c_eta(spec.q) * 0.5, 1e-10));
    CHECK_THROWS_AS(mu_nu(env, LatticeCuboid<2>({{{0.0, 2.0}}}, Direction<2>::from_integer({1, 1})), CellConfig{}),
                    LatticeIncompatible);
}

TEST_CASE("mu of a unit cuboid is positive and below the profile bound", "[cell]") {
    const auto spec = checkerboard(2);
    Environment<2> env(spec);
    const LatticeCuboid<2> t({{{0.0, 1.0}}}, Direction<2>::axis());
    const auto mu = mu_nu(env, t, CellConfig{});
    CHECK_FALSE(mu.fallback);
    CHECK_FALSE(mu.anomaly);
    CHECK(mu.value > 0.0);
    CHECK(mu.value <= spec.c2 * oracle::c_eta(spec.q) * 3.0);
}

TEST_CASE("sigma constants are ordered", "[cell]") {
    const auto w = DoubleWell::quartic();
    const double q = 0.05;
    const auto plus = sigma_pm<1>(EnergyVariant::m_plus, w, q, quick_sigma());
    const auto minus = sigma_pm<1>(EnergyVariant::m_minus, w, q, quick_sigma());
    CHECK(minus.value <= plus.value);
    CHECK(plus.value <= oracle::c_eta(q));
    CHECK(plus.value >= modica_mortola_sigma(w, q));
    CHECK(plus.values.size() == 3);
    CHECK_THROWS_AS(sigma_pm<1>(EnergyVariant::general, w, q, quick_sigma()), ConfigError);
    CHECK_THROWS_AS(sigma_pm<1>(EnergyVariant::m_minus, w, 50.0, quick_sigma()), ConfigError);
}

TEST_CASE("underresolved epsilons are skipped with a warning", "[cell]") {
    SigmaConfig sc = quick_sigma();
    sc.h = 1.0 / 32.0;
    const auto est = sigma_pm<1>(EnergyVariant::m_plus, DoubleWell::quartic(), 0.5, sc);
    CHECK(std::isnan(est.values.back()));
    CHECK(est.warnings.size() == 1);
    sc.epsilon_grid = {0.0625};
    CHECK_THROWS_AS(sigma_pm<1>(EnergyVariant::m_plus, DoubleWell::quartic(), 0.5, sc), ResolutionError);
}

TEST_CASE("bounds check flags estimates outside the window", "[cell]") {
    CHECK(bounds_check(2.0, 2.0, 2.2, 0.8, 1.2).pass);
    CHECK_FALSE(bounds_check(3.0, 2.0, 2.2, 0.8, 1.2).pass);
    CHECK_FALSE(bounds_check(1.0, 2.0, 2.2, 0.8, 1.2).pass);
    const auto b = bounds_check(2.0, 2.0, 2.2, 0.8, 1.2, 0.05);
    CHECK_THAT(b.lower, WithinAbs(1.52, 1e-12));
    CHECK_THAT(b.upper, WithinAbs(2.772, 1e-12));
}

TEST_CASE("inverse-r fit recovers exact data", "[cell]") {
    const auto [f, a] = fit_inverse_r({8, 16, 32}, {2.0 + 3.0 / 8, 2.0 + 3.0 / 16, 2.0 + 3.0 / 32});
    CHECK_THAT(f, WithinAbs(2.0, 1e-12));
    CHECK_THAT(a, WithinAbs(3.0, 1e-12));
    CHECK_THROWS_AS(fit_inverse_r({}, {}), ConfigError);
}

TEST_CASE("rescaled cells reproduce the unit-scale cell", "[cell]") {
    Environment<2> env(checkerboard(3));
    const auto d = Direction<2>::from_angle_degrees(30.0);
    const auto a = eps_scaled_cell(env, d, 2.0, 0.5, Vec<2>{}, CellConfig{});
    const auto b = cell_problem_r(env, d, 4.0, Vec<2>{}, CellConfig{});
    CHECK_THAT(a.normalized, WithinRel(b.normalized, 1e-10));
    CHECK(a.r == 4.0);
    CHECK_THROWS_AS(cell_problem_r(env, d, 2.0, Vec<2>{}, CellConfig{}), ConfigError);
    CHECK_THROWS_AS(eps_scaled_cell(env, d, 1.0, 0.5, Vec<2>{}, CellConfig{}), ConfigError);
}

TEST_CASE("homogeneous environment has no seed variance", "[cell]") {
    EnvironmentSpec s;
    const auto avg = ergodic_average<2>(s, DoubleWell::quartic(), Direction<2>::axis(), 4.0, {1, 2, 3}, CellConfig{});
    CHECK(avg.stddev == 0.0);
    CHECK(avg.mean > 0.0);
    CHECK_THROWS_AS(ergodic_average<2>(s, DoubleWell::quartic(), Direction<2>::axis(), 4.0, {1}, CellConfig{}),
                    ConfigError);
}

TEST_CASE("f_hom estimate bookkeeping", "[cell]") {
    HomogenizeConfig hc;
    hc.r_schedule = {4, 8};
    hc.seeds = {1, 2};
    CellConfig cc;
    cc.threads = 2;
    const auto est = f_hom_estimate<2>(checkerboard(0), DoubleWell::quartic(), Direction<2>::axis(), hc,
                                       {Vec<2>{}, Vec<2>{0.25, 0.1}}, cc);
    CHECK(est.records.size() == 8);
    CHECK(est.seeds.size() == 2);
    CHECK(est.mean > 0.0);
    for (const auto& s : est.seeds) CHECK(s.normalized.size() == 2);
    hc.r_schedule = {8, 4};
    CHECK_THROWS_AS(f_hom_estimate<2>(checkerboard(0), DoubleWell::quartic(), Direction<2>::axis(), hc, {Vec<2>{}}, cc),
                    ConfigError);
}

TEST_CASE("positivity without the gradient term", "[cell]") {
    SolverConfig sc;
    sc.restarts = 0;
    const auto rep = verify_positivity<1>(0.0, {2.0}, 1.0 / 16.0, 3, 1, sc);
    CHECK(rep.pass);
    CHECK(rep.minimum >= -1e-9);
    CHECK(rep.values.size() == 3);
    CHECK(std::isnan(rep.oracle));
    CHECK_THROWS_AS(verify_positivity<1>(0.1, {0.5}, 1.0 / 16.0, 1, 1, sc), ConfigError);
}

TEST_CASE("large q leaves the positivity regime", "[cell]") {
    SolverConfig sc;
    sc.restarts = 0;
    sc.max_iters = 2000;
    const auto rep = verify_positivity<1>(50.0, {4.0}, 1.0 / 16.0, 1, 1, sc);
    CHECK_FALSE(rep.in_regime);
    CHECK_FALSE(rep.pass);
    CHECK(rep.oracle < 0.0);
}

TEST_CASE("sine competitor energy", "[cell]") {
    CHECK_THAT(sine_competitor_energy(0.0, 1.0, 0.5, 2.0), WithinAbs(2.0, 1e-15));
    // delta = 1, k = 1, q = 0: 1 - 1 + 0.375 + 0.5
    CHECK_THAT(sine_competitor_energy(1.0, 1.0, 0.0, 1.0), WithinAbs(0.875, 1e-15));
}
