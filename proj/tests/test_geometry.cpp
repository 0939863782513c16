#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "phasehom/geometry.hpp"

using namespace phasehom;
using Catch::Matchers::WithinAbs;

namespace {

int brute_m_nu(const Mat<2>& r) {
    for (int m = 3;; ++m) {
        bool ok = true;
        for (const auto& row : r)
            for (double v : row) ok = ok && std::abs(m * v - std::round(m * v)) < 1e-12;
        if (ok) return m;
    }
}

}  // namespace

TEST_CASE("rotation maps e_n to nu and is orthogonal", "[geometry]") {
    for (double deg = 0.0; deg < 360.0; deg += 13.0) {
        const auto d = Direction<2>::from_angle_degrees(deg);
        const auto r = rotation_for(d);
        const auto en = apply<2>(r, Vec<2>{0.0, 1.0});
        CHECK_THAT(en[0], WithinAbs(d.nu()[0], 1e-15));
        CHECK_THAT(en[1], WithinAbs(d.nu()[1], 1e-15));
        CHECK_THAT(r[0][0] * r[0][1] + r[1][0] * r[1][1], WithinAbs(0.0, 1e-15));
        CHECK_THAT(r[0][0] * r[1][1] - r[0][1] * r[1][0], WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("direction validation", "[geometry]") {
    CHECK_THROWS_AS(Direction<2>::from_vector({1.0, 1.0}), InvalidDirection);
    CHECK_THROWS_AS(Direction<2>::from_integer({0, 0}), InvalidDirection);
    CHECK(Direction<2>::from_integer({3, 4}).rational());
    CHECK(Direction<2>::from_integer({6, 8}).denominator() == 5);
    CHECK_FALSE(Direction<2>::from_integer({1, 1}).rational());
    CHECK(Direction<2>::from_angle_degrees(90.0).rational());
    CHECK(Direction<2>::from_angle_degrees(90.0).nu()[0] == 0.0);
}

TEST_CASE("M_nu matches a brute-force scan", "[geometry]") {
    const IVec<2> dirs[] = {{0, 1}, {1, 0}, {3, 4}, {-4, 3}, {5, 12}, {8, -15}, {20, 21}, {0, -1}};
    for (const auto& p : dirs) {
        const auto d = Direction<2>::from_integer(p);
        CHECK(m_nu_for(d) == brute_m_nu(rotation_for(d)));
    }
    CHECK(m_nu_for(Direction<2>::axis()) == 3);
    CHECK(m_nu_for(Direction<2>::from_integer({3, 4})) == 5);
    CHECK_THROWS_AS(m_nu_for(Direction<2>::from_angle_degrees(30.0)), LatticeIncompatible);
}

TEST_CASE("oriented cube maps local to physical", "[geometry]") {
    const auto d = Direction<2>::from_angle_degrees(30.0);
    const auto q = OrientedCube<2>::make({1.0, -2.0}, 4.0, d);
    const Vec<2> s{0.7, -1.3};
    const auto y = local_to_physical(q, s);
    const auto back = q.physical_to_local(y);
    CHECK_THAT(back[0], WithinAbs(s[0], 1e-14));
    CHECK_THAT(back[1], WithinAbs(s[1], 1e-14));
    const auto top = local_to_physical(q, Vec<2>{0.0, 1.0});
    CHECK_THAT(top[0] - 1.0, WithinAbs(d.nu()[0], 1e-14));
    CHECK_THAT(top[1] + 2.0, WithinAbs(d.nu()[1], 1e-14));
}

TEST_CASE("lattice cuboid shift vectors are integer and orthogonal to nu", "[geometry]") {
    const auto d = Direction<2>::from_integer({3, 4});
    const LatticeCuboid<2> t({{{0.0, 2.0}}}, d);
    for (std::int64_t z : {-3, -1, 1, 2, 7}) {
        const auto v = t.shift_vector({z});
        CHECK(v[0] * 3 + v[1] * 4 == 0);
        CHECK(v[0] * v[0] + v[1] * v[1] == 25 * z * z);
    }
}

TEST_CASE("lattice cuboid containment", "[geometry]") {
    const auto d = Direction<2>::from_integer({3, 4});
    const LatticeCuboid<2> t({{{0.0, 2.0}}}, d);
    CHECK(t.area() == 2.0);
    CHECK(t.m_nu() == 5);
    const auto [lo, hi] = t.local_bounds();
    CHECK(lo[0] == 0.0);
    CHECK(hi[0] == 10.0);
    CHECK(hi[1] == 5.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 2000; ++i) {
        const Vec<2> y{u(rng), u(rng)};
        const auto s = apply_transpose<2>(t.rotation(), y);
        const bool inside = s[0] >= lo[0] && s[0] < hi[0] && s[1] >= lo[1] && s[1] < hi[1];
        CHECK(t.contains(y) == inside);
    }
    const auto moved = t.translated({2});
    const auto z = t.shift_vector({2});
    const Vec<2> probe = apply<2>(t.rotation(), Vec<2>{1.0, 0.5});
    CHECK(moved.contains({probe[0] + static_cast<double>(z[0]), probe[1] + static_cast<double>(z[1])}));
    CHECK_THROWS_AS(LatticeCuboid<2>({{{1.0, 1.0}}}, d), ConfigError);
}
