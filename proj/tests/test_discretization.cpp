#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "phasehom/phasehom.hpp"

using namespace phasehom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EnvironmentSpec homogeneous(double q) {
    EnvironmentSpec s;
    s.b = {q, q};
    s.q = q;
    return s;
}

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

GridField<2> rotated_grid(double deg, double side, double h, Vec<2> x = {}) {
    return GridField<2>(GridSpec<2>::cube(OrientedCube<2>::make(x, side, Direction<2>::from_angle_degrees(deg)), h));
}

}  // namespace

TEST_CASE("stencils are exact on quadratics", "[discretization]") {
    auto f = rotated_grid(30.0, 4.0, 0.25);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto s = f.local(k);
        f[k] = 1.5 + 0.3 * s[0] - 0.7 * s[1] + 0.2 * s[0] * s[0] - 0.45 * s[0] * s[1] + 0.9 * s[1] * s[1];
    }
    for (std::size_t k = 0; k < f.interior().size(); ++k) {
        const auto s = f.local(static_cast<std::size_t>(f.interior()[k]));
        const auto g = discrete_gradient_local(f, k);
        const auto H = discrete_hessian_local(f, k);
        CHECK_THAT(g[0], WithinAbs(0.3 + 0.4 * s[0] - 0.45 * s[1], 1e-12));
        CHECK_THAT(g[1], WithinAbs(-0.7 - 0.45 * s[0] + 1.8 * s[1], 1e-12));
        CHECK_THAT(H[0][0], WithinAbs(0.4, 1e-11));
        CHECK_THAT(H[1][1], WithinAbs(1.8, 1e-11));
        CHECK_THAT(H[0][1], WithinAbs(-0.45, 1e-11));
    }
}

TEST_CASE("grid layout: interior count, ghosts and periodic wrap", "[discretization]") {
    auto f = rotated_grid(0.0, 2.0, 0.25);
    CHECK(f.interior().size() == 64);
    CHECK(f.size() == 100);
    std::size_t frozen = 0;
    for (auto v : f.frozen_mask()) frozen += v;
    CHECK(frozen == 36);

    GridSpec<2> spec = GridSpec<2>::cube(OrientedCube<2>::make({}, 2.0, Direction<2>::axis()), 0.25);
    spec.periodic[0] = true;
    GridField<2> p(spec);
    CHECK(p.size() == 80);
    CHECK_THROWS_AS(GridField<2>(GridSpec<2>::cube(OrientedCube<2>::make({}, 1.0, Direction<2>::axis()), 0.3)),
                    ConfigError);
}

TEST_CASE("constant field gives volume over epsilon", "[discretization]") {
    Environment<2> env(homogeneous(0.05));
    for (double eps : {1.0, 0.5}) {
        auto f = rotated_grid(20.0, 4.0, 0.25 * eps);
        CHECK_THAT(discrete_energy(f, env, {eps}), WithinRel(16.0 / eps, 1e-13));
    }
}

TEST_CASE("profile energy close to C_eta times the face", "[discretization]") {
    const double q = 0.05;
    Environment<2> env(homogeneous(q));
    const double c = oracle::c_eta(q);
    for (double deg : {0.0, 30.0, 45.0}) {
        const double h = 1.0 / 32.0;
        auto f = rotated_grid(deg, 2.0, h);
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = eval_profile(f.local(k)[1]);
        const double e = discrete_energy(f, env, {1.0});
        CHECK(e <= c * 2.0 * (1.0 + 2.0 * h));
        CHECK_THAT(e, WithinRel(2.0 * c, 0.01));
    }
}

TEST_CASE("discrete energy converges at second order", "[discretization]") {
    const double q = 0.5;
    Environment<1> env(homogeneous(q));
    const double c = oracle::c_eta(q);
    std::vector<double> err;
    for (double h : {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0}) {
        GridField<1> f(GridSpec<1>::cube(OrientedCube<1>::make({}, 2.0, Direction<1>::axis()), h));
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = eval_profile(f.local(k)[0]);
        err.push_back(std::abs(discrete_energy(f, env, {1.0}) - c));
    }
    CHECK(err[0] / err[1] > 3.0);
    CHECK(err[1] / err[2] > 3.0);
}

TEST_CASE("gradient matches central differences", "[discretization]") {
    Environment<2> env(checkerboard(4));
    auto f = rotated_grid(37.0, 3.0, 0.125);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (auto& v : f.values()) v = u(rng);
    for (auto variant : {EnergyVariant::general, EnergyVariant::m_plus, EnergyVariant::m_minus}) {
        const EnergyParams p{0.5, variant};
        const auto g = discrete_energy_gradient(f, env, p);
        double gmax = 0.0;
        for (double x : g) gmax = std::max(gmax, std::abs(x));
        auto w = f;
        for (std::size_t k = 0; k < f.size(); k += 7) {
            if (f.is_frozen(k)) {
                CHECK(g[k] == 0.0);
                continue;
            }
            w[k] = f[k] + 1e-6;
            const double ep = discrete_energy(w, env, p);
            w[k] = f[k] - 1e-6;
            const double em = discrete_energy(w, env, p);
            w[k] = f[k];
            CHECK(std::abs((ep - em) / 2e-6 - g[k]) <= 1e-6 * gmax);
        }
    }
}

TEST_CASE("M+ minus M- is linear in q", "[discretization]") {
    auto f = rotated_grid(10.0, 2.0, 0.125);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : f.values()) v = u(rng);
    auto diff = [&](double q) {
        const EnergyOperator<2> p(f, DoubleWell::quartic(), q, {1.0, EnergyVariant::m_plus});
        const EnergyOperator<2> m(f, DoubleWell::quartic(), q, {1.0, EnergyVariant::m_minus});
        return p.energy(f.values()) - m.energy(f.values());
    };
    CHECK_THAT(diff(0.3), WithinRel(3.0 * diff(0.1), 1e-10));
    CHECK_THAT(diff(0.0), WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(EnergyOperator<2>(f, DoubleWell::quartic(), 0.1, {1.0, EnergyVariant::general}), ConfigError);
}

TEST_CASE("nodal sandwich between the comparison energies", "[discretization]") {
    const auto spec = checkerboard(8);
    Environment<2> env(spec);
    auto f = rotated_grid(63.0, 4.0, 0.25, {2.3, -1.1});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto& v : f.values()) v = u(rng);
    const EnergyOperator<2> e(f, env, {1.0});
    const EnergyOperator<2> lo(f, env.well(), spec.q, {1.0, EnergyVariant::m_minus});
    const EnergyOperator<2> hi(f, env.well(), spec.q, {1.0, EnergyVariant::m_plus});
    for (std::size_t k = 0; k < f.interior().size(); ++k) {
        const double v = e.node_energy(f.values(), k);
        CHECK(spec.c1 * lo.node_energy(f.values(), k) <= v + 1e-13);
        CHECK(v <= spec.c2 * hi.node_energy(f.values(), k) + 1e-13);
    }
}

TEST_CASE("energy is translation covariant under lattice shifts", "[discretization]") {
    Environment<2> env(checkerboard(6));
    auto a = rotated_grid(0.0, 4.0, 0.25, {0.3, 0.4});
    auto b = rotated_grid(0.0, 4.0, 0.25, {5.3, -2.6});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : a.values()) v = u(rng);
    b.values() = a.values();
    const double ea = discrete_energy(a, env.shifted({5, -3}), {1.0});
    const double eb = discrete_energy(b, env, {1.0});
    CHECK_THAT(ea, WithinRel(eb, 1e-14));
}

TEST_CASE("underresolved grids are rejected", "[discretization]") {
    Environment<2> env(homogeneous(0.05));
    auto f = rotated_grid(0.0, 2.0, 0.5);
    CHECK_THROWS_AS(discrete_energy(f, env, {1.0}), ResolutionError);
    CHECK_NOTHROW(discrete_energy(f, env, {1.0, EnergyVariant::general, true}));
    CHECK_THROWS_AS(discrete_energy(f, env, {0.0}), ConfigError);
}
