#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "errors.hpp"

namespace phasehom {

template <std::size_t Dim>
using Vec = std::array<double, Dim>;

/// Row-major dense matrix, m[row][col].
template <std::size_t Dim>
using Mat = std::array<std::array<double, Dim>, Dim>;

template <std::size_t Dim>
using IVec = std::array<std::int64_t, Dim>;

template <std::size_t Dim>
constexpr double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t Dim>
double norm(const Vec<Dim>& a) {
    return std::sqrt(dot<Dim>(a, a));
}

template <std::size_t N>
constexpr std::array<double, N> operator+(std::array<double, N> a, const std::array<double, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
    return a;
}

template <std::size_t N>
constexpr std::array<double, N> operator-(std::array<double, N> a, const std::array<double, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
    return a;
}

template <std::size_t N>
constexpr std::array<double, N> operator*(double s, std::array<double, N> a) {
    for (auto& v : a) v *= s;
    return a;
}

template <std::size_t Dim>
constexpr Vec<Dim> apply(const Mat<Dim>& m, const Vec<Dim>& v) {
    Vec<Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j) out[i] += m[i][j] * v[j];
    return out;
}

template <std::size_t Dim>
constexpr Vec<Dim> apply_transpose(const Mat<Dim>& m, const Vec<Dim>& v) {
    Vec<Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j) out[i] += m[j][i] * v[j];
    return out;
}

/// R A R^T, used to move a Hessian from local to physical coordinates.
template <std::size_t Dim>
constexpr Mat<Dim> conjugate(const Mat<Dim>& r, const Mat<Dim>& a) {
    Mat<Dim> ra{};
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j)
            for (std::size_t k = 0; k < Dim; ++k) ra[i][j] += r[i][k] * a[k][j];
    Mat<Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j)
            for (std::size_t k = 0; k < Dim; ++k) out[i][j] += ra[i][k] * r[j][k];
    return out;
}

template <std::size_t Dim>
constexpr double frobenius_sq(const Mat<Dim>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < Dim; ++i)
        for (std::size_t j = 0; j < Dim; ++j) s += a[i][j] * a[i][j];
    return s;
}

/// Unit normal of an interface. Directions built from integer vectors whose
/// norm is an integer are flagged rational; only those admit lattice cuboids.
template <std::size_t Dim>
class Direction {
public:
    static_assert(Dim == 1 || Dim == 2, "only n = 1 and n = 2 are supported");

    static Direction from_vector(const Vec<Dim>& v) {
        const double len = norm<Dim>(v);
        if (!(std::abs(len - 1.0) <= 1e-12)) throw InvalidDirection("direction is not a unit vector");
        Direction d;
        d.nu_ = v;
        return d;
    }

    /// nu = p / |p|; rational when |p|^2 is a perfect square.
    static Direction from_integer(IVec<Dim> p) {
        std::int64_t g = 0;
        for (auto c : p) g = std::gcd(g, c < 0 ? -c : c);
        if (g == 0) throw InvalidDirection("zero vector is not a direction");
        std::int64_t n2 = 0;
        for (auto& c : p) {
            c /= g;
            n2 += c * c;
        }
        Direction d;
        const double len = std::sqrt(static_cast<double>(n2));
        for (std::size_t i = 0; i < Dim; ++i) d.nu_[i] = static_cast<double>(p[i]) / len;
        auto root = static_cast<std::int64_t>(std::llround(len));
        if (root * root == n2) {
            d.rational_ = true;
            d.numer_ = p;
            d.denom_ = root;
            for (std::size_t i = 0; i < Dim; ++i) d.nu_[i] = static_cast<double>(p[i]) / static_cast<double>(root);
        }
        return d;
    }

    /// nu = (cos theta, sin theta). Multiples of 90 degrees are snapped to exact axes.
    static Direction from_angle_degrees(double degrees) requires(Dim == 2) {
        const double quarter = degrees / 90.0;
        if (std::abs(quarter - std::round(quarter)) < 1e-12) {
            const auto k = ((static_cast<std::int64_t>(std::llround(quarter)) % 4) + 4) % 4;
            static constexpr std::int64_t cx[] = {1, 0, -1, 0};
            static constexpr std::int64_t cy[] = {0, 1, 0, -1};
            return from_integer({cx[k], cy[k]});
        }
        const double rad = degrees * M_PI / 180.0;
        Direction d;
        d.nu_ = {std::cos(rad), std::sin(rad)};
        return d;
    }

    static Direction axis() {
        IVec<Dim> p{};
        p[Dim - 1] = 1;
        return from_integer(p);
    }

    const Vec<Dim>& nu() const noexcept { return nu_; }
    double operator[](int i) const { return nu_[i]; }
    bool rational() const noexcept { return rational_; }
    const IVec<Dim>& numerator() const noexcept { return numer_; }
    std::int64_t denominator() const noexcept { return denom_; }

    double angle_degrees() const {
        if constexpr (Dim == 1) {
            return nu_[0] > 0 ? 0.0 : 180.0;
        } else {
            double a = std::atan2(nu_[1], nu_[0]) * 180.0 / M_PI;
            return a < 0 ? a + 360.0 : a;
        }
    }

private:
    Direction() = default;

    Vec<Dim> nu_{};
    bool rational_ = false;
    IVec<Dim> numer_{};
    std::int64_t denom_ = 0;
};

/// Orthogonal R_nu with R_nu e_n = nu.
///
/// For n = 2 this is the proper rotation [[nu2, nu1], [-nu1, nu2]]: its first
/// column (nu2, -nu1) is the in-plane tangent and its second column is nu.
/// Rational directions give rational entries, and R_{-nu} = -R_nu maps every
/// centred axis cube onto itself.
template <std::size_t Dim>
Mat<Dim> rotation_for(const Direction<Dim>& d) {
    const auto& nu = d.nu();
    if (!(std::abs(norm<Dim>(nu) - 1.0) <= 1e-12)) throw InvalidDirection("direction is not a unit vector");
    Mat<Dim> r{};
    if constexpr (Dim == 1) {
        r[0][0] = nu[0];
    } else {
        r[0][0] = nu[1];
        r[0][1] = nu[0];
        r[1][0] = -nu[0];
        r[1][1] = nu[1];
    }
    return r;
}

/// Smallest integer M >= 3 such that M R_nu has integer entries.
template <std::size_t Dim>
int m_nu_for(const Direction<Dim>& d) {
    if (!d.rational()) throw LatticeIncompatible("direction has irrational rotation entries");
    // Entries of R_nu are +-p_i / |p| with gcd(p) = 1, so M must be a multiple of |p|.
    const std::int64_t q = d.denominator();
    std::int64_t m = q;
    while (m < 3) m += q;
    return static_cast<int>(m);
}

/// The cube Q_rho^nu(x) = R_nu Q_rho(0) + x.
template <std::size_t Dim>
struct OrientedCube {
    Vec<Dim> center{};
    double side = 1.0;
    Mat<Dim> rotation{};

    static OrientedCube make(const Vec<Dim>& x, double rho, const Direction<Dim>& d) {
        if (!(rho > 0.0)) throw ConfigError("cube side must be positive");
        return OrientedCube{x, rho, rotation_for(d)};
    }

    Vec<Dim> local_to_physical(const Vec<Dim>& s) const { return apply<Dim>(rotation, s) + center; }
    Vec<Dim> physical_to_local(const Vec<Dim>& y) const { return apply_transpose<Dim>(rotation, y - center); }
};

template <std::size_t Dim>
Vec<Dim> local_to_physical(const OrientedCube<Dim>& cube, const Vec<Dim>& s) {
    return cube.local_to_physical(s);
}

/// T_nu R = M_nu R_nu (R x [-c, c)) for a half-open box R in R^{n-1}.
template <std::size_t Dim>
class LatticeCuboid {
public:
    using Base = std::array<std::pair<double, double>, Dim - 1>;

    LatticeCuboid(Base base, const Direction<Dim>& d) : base_(base), direction_(d) {
        for (const auto& [a, b] : base_)
            if (!(b > a)) throw ConfigError("cuboid intervals must satisfy a < b");
        m_nu_ = m_nu_for(d);
        rotation_ = rotation_for(d);
        half_height_ = 0.5;
        for (const auto& [a, b] : base_) half_height_ = std::max(half_height_, (b - a) / 2.0);
    }

    const Base& base() const noexcept { return base_; }
    const Direction<Dim>& direction() const noexcept { return direction_; }
    int m_nu() const noexcept { return m_nu_; }
    double half_height() const noexcept { return half_height_; }
    const Mat<Dim>& rotation() const noexcept { return rotation_; }

    /// (n-1)-dimensional measure of R.
    double area() const {
        double a = 1.0;
        for (const auto& [lo, hi] : base_) a *= hi - lo;
        return a;
    }

    double min_side() const {
        double m = INFINITY;
        for (const auto& [lo, hi] : base_) m = std::min(m, hi - lo);
        return m;
    }

    /// Bounds of M_nu (R x [-c, c)) in the rotated frame.
    std::pair<Vec<Dim>, Vec<Dim>> local_bounds() const {
        Vec<Dim> lo{};
        Vec<Dim> hi{};
        for (std::size_t i = 0; i < Dim - 1; ++i) {
            lo[i] = m_nu_ * base_[i].first;
            hi[i] = m_nu_ * base_[i].second;
        }
        lo[Dim - 1] = -m_nu_ * half_height_;
        hi[Dim - 1] = m_nu_ * half_height_;
        return {lo, hi};
    }

    bool contains(const Vec<Dim>& y) const {
        const auto s = apply_transpose<Dim>(rotation_, y);
        const auto [lo, hi] = local_bounds();
        for (std::size_t i = 0; i < Dim; ++i)
            if (s[i] < lo[i] || s[i] >= hi[i]) return false;
        return true;
    }

    /// z'_nu = M_nu R_nu (z', 0), an integer vector on the hyperplane orthogonal to nu.
    IVec<Dim> shift_vector(const IVec<Dim - 1>& zp) const {
        Vec<Dim> s{};
        for (std::size_t i = 0; i < Dim - 1; ++i) s[i] = static_cast<double>(m_nu_ * zp[i]);
        const auto y = apply<Dim>(rotation_, s);
        IVec<Dim> z{};
        for (std::size_t i = 0; i < Dim; ++i) z[i] = static_cast<std::int64_t>(std::llround(y[i]));
        return z;
    }

    LatticeCuboid translated(const IVec<Dim - 1>& zp) const {
        Base b = base_;
        for (std::size_t i = 0; i < Dim - 1; ++i) {
            b[i].first += static_cast<double>(zp[i]);
            b[i].second += static_cast<double>(zp[i]);
        }
        return LatticeCuboid(b, direction_);
    }

private:
    Base base_;
    Direction<Dim> direction_;
    int m_nu_ = 3;
    Mat<Dim> rotation_{};
    double half_height_ = 0.5;
};

}  // namespace phasehom
