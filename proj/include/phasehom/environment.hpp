#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core_math.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace phasehom {

/// splitmix64 finalizer; the mixing step of the counter-based coefficient generator.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform [0, 1) value keyed by (seed, lattice cell, stream). Order independent.
template <std::size_t Dim>
double keyed_uniform(std::uint64_t seed, const IVec<Dim>& cell, std::uint64_t stream) {
    std::uint64_t h = mix64(seed);
    for (std::size_t i = 0; i < Dim; ++i) h = mix64(h ^ static_cast<std::uint64_t>(cell[i]));
    h = mix64(h ^ (stream * 0xd6e8feb86659fd93ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return 0.5 * (lo + hi); }
    double lerp(double t) const { return lo + (hi - lo) * t; }
};

enum class EnvironmentKind {
    homogeneous,   ///< coefficients are the range midpoints everywhere
    checkerboard,  ///< i.i.d. triple per unit cell of Z^n (ergodic)
    pinned,        ///< one random triple per seed, constant in space (stationary, not ergodic)
};

inline std::string to_string(EnvironmentKind k) {
    switch (k) {
        case EnvironmentKind::homogeneous: return "homogeneous";
        case EnvironmentKind::checkerboard: return "checkerboard";
        case EnvironmentKind::pinned: return "pinned";
    }
    return "unknown";
}

inline EnvironmentKind environment_kind_from_string(const std::string& s) {
    if (s == "homogeneous") return EnvironmentKind::homogeneous;
    if (s == "checkerboard") return EnvironmentKind::checkerboard;
    if (s == "pinned") return EnvironmentKind::pinned;
    throw ConfigError("unknown environment kind '" + s + "'");
}

struct EnvironmentSpec {
    EnvironmentKind kind = EnvironmentKind::homogeneous;
    Range a{1.0, 1.0};
    Range b{0.05, 0.05};
    Range c{1.0, 1.0};
    double q = 0.05;
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        auto ordered = [](const Range& r, const char* name) {
            if (!(r.lo <= r.hi)) throw ConfigError(std::string(name) + "_range must satisfy lo <= hi");
        };
        ordered(a, "a");
        ordered(b, "b");
        ordered(c, "c");
        if (!(a.lo > 0.0)) throw ConfigError("a_range must be bounded below by a positive constant");
        if (!(c.lo > 0.0)) throw ConfigError("c_range must be bounded below by a positive constant");
        if (!(q > 0.0)) throw ConfigError("q must be positive");
        if (b.lo < -q) throw ConfigError("b_range lower end must be >= -q");
        if (!(c1 > 0.0 && c2 > 0.0)) throw ConfigError("c1 and c2 must be positive");
        if (c1 > c2) throw ConfigError("c1 must not exceed c2");
    }
};

struct Coefficients {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
};

/// A realization of the random density f(omega, x, u, xi, zeta) = a W(u) + b |xi|^2 + c |zeta|^2
/// with coefficients constant on unit lattice cells.
///
/// Lattice shifts are stored as an integer cell offset, so shifted lookups are
/// bit-identical to unshifted lookups at translated points.
template <std::size_t Dim>
class Environment {
public:
    explicit Environment(EnvironmentSpec spec, DoubleWell well = DoubleWell::quartic())
        : spec_(spec), well_(std::move(well)) {
        spec_.validate();
        if (spec_.kind == EnvironmentKind::pinned) pinned_ = draw(IVec<Dim>{});
    }

    const EnvironmentSpec& spec() const noexcept { return spec_; }
    const DoubleWell& well() const noexcept { return well_; }
    const IVec<Dim>& offset() const noexcept { return offset_; }

    static IVec<Dim> cell_of(const Vec<Dim>& x) {
        IVec<Dim> z{};
        for (std::size_t i = 0; i < Dim; ++i) z[i] = static_cast<std::int64_t>(std::floor(x[i]));
        return z;
    }

    Coefficients cell_coefficients(const IVec<Dim>& cell) const {
        switch (spec_.kind) {
            case EnvironmentKind::homogeneous: return {spec_.a.mid(), spec_.b.mid(), spec_.c.mid()};
            case EnvironmentKind::pinned: return pinned_;
            case EnvironmentKind::checkerboard: {
                IVec<Dim> z = cell;
                for (std::size_t i = 0; i < Dim; ++i) z[i] += offset_[i];
                return draw(z);
            }
        }
        return {};
    }

    Coefficients coefficients_at(const Vec<Dim>& x) const { return cell_coefficients(cell_of(x)); }

    /// f(x, u, xi, zeta). The coefficients do not depend on (u, xi, zeta).
    double density(const Vec<Dim>& x, double u, const Vec<Dim>& xi, const Mat<Dim>& zeta) const {
        const auto k = coefficients_at(x);
        return k.a * well_.value(u) + k.b * dot<Dim>(xi, xi) + k.c * frobenius_sq<Dim>(zeta);
    }

    /// The environment of tau_z omega: its density at x equals this one's at x + z.
    Environment shifted(const IVec<Dim>& z) const {
        Environment e = *this;
        for (std::size_t i = 0; i < Dim; ++i) e.offset_[i] += z[i];
        return e;
    }

private:
    Coefficients draw(const IVec<Dim>& z) const {
        return {spec_.a.lerp(keyed_uniform<Dim>(spec_.seed, z, 1)),
                spec_.b.lerp(keyed_uniform<Dim>(spec_.seed, z, 2)),
                spec_.c.lerp(keyed_uniform<Dim>(spec_.seed, z, 3))};
    }

    EnvironmentSpec spec_;
    DoubleWell well_;
    IVec<Dim> offset_{};
    Coefficients pinned_{};
};

template <std::size_t Dim>
double density_eval(const Environment<Dim>& env, const Vec<Dim>& x, double u, const Vec<Dim>& xi,
                    const Mat<Dim>& zeta) {
    return env.density(x, u, xi, zeta);
}

template <std::size_t Dim>
Environment<Dim> shift_environment(const Environment<Dim>& env, const IVec<Dim>& z) {
    return env.shifted(z);
}

/// Real-valued overload; rejects anything that is not a lattice vector.
template <std::size_t Dim>
Environment<Dim> shift_environment(const Environment<Dim>& env, const Vec<Dim>& z) {
    IVec<Dim> iz{};
    for (std::size_t i = 0; i < Dim; ++i) {
        if (z[i] != std::floor(z[i])) throw Unsupported("only lattice shifts supported");
        iz[i] = static_cast<std::int64_t>(z[i]);
    }
    return env.shifted(iz);
}

template <std::size_t Dim>
struct GrowthSample {
    Vec<Dim> x{};
    double u = 0.0;
    Vec<Dim> xi{};
    Mat<Dim> zeta{};
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;
};

template <std::size_t Dim>
struct GrowthReport {
    std::size_t samples = 0;
    std::vector<GrowthSample<Dim>> counterexamples;
    bool pass() const { return counterexamples.empty(); }
};

/// Checks c1 (W - q|xi|^2 + |zeta|^2) <= f <= c2 (W + q|xi|^2 + |zeta|^2) on random tuples.
/// A third of the tuples sit in a well with zero Hessian so the gradient term dominates.
/// Only violations beyond floating-point rounding are reported.
template <std::size_t Dim>
GrowthReport<Dim> verify_growth_bounds(const Environment<Dim>& env, std::size_t samples, std::uint64_t seed = 1) {
    if (samples < 1) throw ConfigError("growth check needs at least one sample");
    const auto& s = env.spec();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-50.0, 50.0);
    std::uniform_real_distribution<double> phase(-3.0, 3.0);
    std::normal_distribution<double> gauss(0.0, 2.0);
    GrowthReport<Dim> report;
    report.samples = samples;
    for (std::size_t k = 0; k < samples; ++k) {
        GrowthSample<Dim> g;
        for (auto& v : g.x) v = pos(rng);
        for (auto& v : g.xi) v = gauss(rng);
        const bool in_well = k % 3 == 0;
        g.u = in_well ? (k % 2 == 0 ? 1.0 : -1.0) : phase(rng);
        for (std::size_t i = 0; i < Dim; ++i)
            for (std::size_t j = i; j < Dim; ++j) g.zeta[i][j] = g.zeta[j][i] = in_well ? 0.0 : gauss(rng);
        const double w = env.well().value(g.u);
        const double xi2 = dot<Dim>(g.xi, g.xi);
        const double z2 = frobenius_sq<Dim>(g.zeta);
        g.value = env.density(g.x, g.u, g.xi, g.zeta);
        g.lower = s.c1 * (w - s.q * xi2 + z2);
        g.upper = s.c2 * (w + s.q * xi2 + z2);
        const double scale = 1e-12 * (std::abs(w) + s.q * xi2 + z2) * std::max(1.0, s.c2);
        if (g.lower - g.value > scale || g.value - g.upper > scale) report.counterexamples.push_back(g);
    }
    return report;
}

}  // namespace phasehom
