#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "phasehom/environment.hpp"

using namespace phasehom;
using Catch::Matchers::WithinAbs;

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

}  // namespace

TEST_CASE("coefficients are constant on unit cells and within ranges", "[environment]") {
    Environment<2> env(checkerboard(5));
    for (int i = -5; i < 5; ++i)
        for (int j = -5; j < 5; ++j) {
            const auto k = env.coefficients_at({i + 0.1, j + 0.2});
            const auto k2 = env.coefficients_at({i + 0.9, j + 0.95});
            CHECK(k.a == k2.a);
            CHECK(k.b == k2.b);
            CHECK(k.a >= 0.8);
            CHECK(k.a <= 1.2);
            CHECK(k.b >= -0.04);
            CHECK(k.b <= 0.05);
        }
}

TEST_CASE("shift is exact", "[environment]") {
    Environment<2> env(checkerboard(9));
    const IVec<2> z{7, -3};
    const auto moved = shift_environment(env, z);
    for (double x = -4.3; x < 4.0; x += 0.7)
        for (double y = -2.1; y < 3.0; y += 0.9) {
            const Vec<2> p{x, y};
            const auto a = moved.coefficients_at(p);
            const auto b = env.coefficients_at({x + 7.0, y - 3.0});
            CHECK(a.a == b.a);
            CHECK(a.b == b.b);
            CHECK(a.c == b.c);
        }
    CHECK_THROWS_AS(shift_environment(env, Vec<2>{0.5, 0.0}), Unsupported);
}

TEST_CASE("same seed gives the same environment", "[environment]") {
    Environment<2> a(checkerboard(3));
    Environment<2> b(checkerboard(3));
    Environment<2> c(checkerboard(4));
    bool differs = false;
    for (int i = 0; i < 20; ++i) {
        CHECK(a.coefficients_at({i + 0.5, 0.5}).a == b.coefficients_at({i + 0.5, 0.5}).a);
        differs = differs || a.coefficients_at({i + 0.5, 0.5}).a != c.coefficients_at({i + 0.5, 0.5}).a;
    }
    CHECK(differs);
}

TEST_CASE("stationary in law", "[environment]") {
    // empirical mean of a over many seeds at two distant cells
    double m0 = 0.0, m1 = 0.0;
    const int n = 4000;
    for (int s = 0; s < n; ++s) {
        Environment<2> env(checkerboard(static_cast<std::uint64_t>(s)));
        m0 += env.coefficients_at({0.5, 0.5}).a;
        m1 += env.coefficients_at({1000.5, -77.5}).a;
    }
    m0 /= n;
    m1 /= n;
    CHECK_THAT(m0, WithinAbs(1.0, 0.01));
    CHECK_THAT(m1, WithinAbs(1.0, 0.01));
}

TEST_CASE("pinned environment is constant in space", "[environment]") {
    auto spec = checkerboard(2);
    spec.kind = EnvironmentKind::pinned;
    Environment<2> env(spec);
    const auto k = env.coefficients_at({0.5, 0.5});
    CHECK(env.coefficients_at({-40.2, 13.7}).a == k.a);
    CHECK(env.shifted({5, 5}).coefficients_at({0.5, 0.5}).b == k.b);
}

TEST_CASE("growth bounds hold for admissible ranges", "[environment]") {
    Environment<2> env(checkerboard(1));
    const auto rep = verify_growth_bounds(env, 20000);
    CHECK(rep.pass());
    CHECK(rep.samples == 20000);

    EnvironmentSpec h;
    h.q = 0.05;
    CHECK(verify_growth_bounds(Environment<2>(h), 5000).pass());
}

TEST_CASE("growth bounds report counterexamples", "[environment]") {
    // b below -c1 q breaks the lower bound wherever the gradient dominates
    auto spec = checkerboard(1);
    spec.b = {-0.05, 0.05};
    Environment<2> env(spec);
    const auto rep = verify_growth_bounds(env, 5000);
    CHECK_FALSE(rep.pass());
    for (const auto& g : rep.counterexamples) CHECK((g.value < g.lower || g.value > g.upper));
}

TEST_CASE("c1 below 1 with a below c1 fails the lower bound", "[environment]") {
    EnvironmentSpec s;
    s.kind = EnvironmentKind::homogeneous;
    s.a = {0.5, 0.5};
    s.b = {0.05, 0.05};
    s.c = {1.0, 1.0};
    s.q = 0.05;
    s.c1 = 0.8;
    s.c2 = 1.2;
    CHECK_FALSE(verify_growth_bounds(Environment<2>(s), 3000).pass());
}

TEST_CASE("environment kind names round trip", "[environment]") {
    for (auto k : {EnvironmentKind::homogeneous, EnvironmentKind::checkerboard, EnvironmentKind::pinned})
        CHECK(environment_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(environment_kind_from_string("bogus"), ConfigError);
}
