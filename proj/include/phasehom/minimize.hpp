#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "energy.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace phasehom {

enum class StepRule { fixed, bb };

struct SolverConfig {
    long max_iters = 50000;
    /// Stop when the projected gradient satisfies max |g| < grad_tol. Zero means 1e-6 h^n.
    double grad_tol = 0.0;
    StepRule step_rule = StepRule::bb;
    /// Perturbed re-solves started from the best field found so far.
    int restarts = 3;
    double noise = 0.05;
    std::uint64_t seed = 0;
    double u_cap = 3.0;
    /// Step for StepRule::fixed, as a multiple of 1 / L with L the Lipschitz estimate.
    double fixed_step = 1.0;

    void validate() const {
        if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
        if (grad_tol < 0.0) throw ConfigError("grad_tol must be positive");
        if (restarts < 0) throw ConfigError("restarts must be nonnegative");
        if (!(u_cap > 1.0)) throw ConfigError("u_cap must exceed 1");
        if (noise < 0.0) throw ConfigError("noise must be nonnegative");
    }

    template <std::size_t Dim>
    double tolerance_for(double h) const {
        return grad_tol > 0.0 ? grad_tol : 1e-6 * std::pow(h, Dim);
    }
};

template <std::size_t Dim>
struct SolveResult {
    GridField<Dim> field;
    double value = 0.0;
    long iters = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
};

namespace detail {

inline void check_finite(double e, long it) {
    if (!std::isfinite(e)) throw NumericalDivergence("energy became non-finite at iteration " + std::to_string(it), it);
}

/// Max norm of the gradient projected onto the box |u| <= cap.
inline double projected_norm(const std::vector<double>& u, const std::vector<double>& g,
                             const std::vector<std::uint8_t>& frozen, double cap) {
    double m = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (frozen[k]) continue;
        double gk = g[k];
        if (u[k] >= cap && gk < 0.0) gk = 0.0;
        if (u[k] <= -cap && gk > 0.0) gk = 0.0;
        m = std::max(m, std::abs(gk));
    }
    return m;
}

struct Descent {
    double value;
    long iters;
    double grad_norm;
    bool converged;
};

/// Projected gradient descent with alternating Barzilai-Borwein steps and an
/// Armijo backtracking safeguard, so accepted energies never increase.
template <std::size_t Dim>
Descent descend(const EnergyOperator<Dim>& op, std::vector<double>& u, const SolverConfig& cfg, long budget) {
    const auto& frozen = op.layout().frozen_mask();
    const std::size_t n = u.size();
    const double cap = cfg.u_cap;
    const double tol = cfg.tolerance_for<Dim>(op.layout().h());
    const double alpha0 = cfg.fixed_step / op.lipschitz_estimate(cap);

    std::vector<double> g(n), trial(n), gt(n);
    double e = op.energy_and_gradient(u, g);
    check_finite(e, 0);
    double alpha = alpha0;
    int stalled = 0;
    long it = 0;
    for (; it < budget; ++it) {
        const double gn = projected_norm(u, g, frozen, cap);
        if (gn < tol) return {e, it, gn, true};
        double et = 0.0;
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            double decrease = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (frozen[k]) {
                    trial[k] = u[k];
                    continue;
                }
                trial[k] = std::clamp(u[k] - alpha * g[k], -cap, cap);
                decrease += g[k] * (u[k] - trial[k]);
            }
            et = op.energy_and_gradient(trial, gt);
            if (std::isfinite(et) && et <= e - 1e-4 * decrease) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left along the projected gradient.
            check_finite(et, it);
            return {e, it, gn, gn < 100.0 * tol};
        }
        double ss = 0.0;
        double sy = 0.0;
        double yy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double s = trial[k] - u[k];
            const double y = gt[k] - g[k];
            ss += s * s;
            sy += s * y;
            yy += y * y;
        }
        u.swap(trial);
        g.swap(gt);
        // Accepted steps that no longer change the energy in floating point.
        stalled = (e - et <= 1e-15 * std::max(1.0, std::abs(e))) ? stalled + 1 : 0;
        e = et;
        if (stalled >= 20) {
            const double gs = projected_norm(u, g, frozen, cap);
            return {e, it + 1, gs, gs < 100.0 * tol};
        }
        if (cfg.step_rule == StepRule::fixed) {
            alpha = alpha0;
        } else if (sy > 0.0) {
            alpha = (it % 2 == 0) ? ss / sy : sy / yy;
        } else {
            alpha = std::max(alpha * 4.0, alpha0);
        }
    }
    const double gn = projected_norm(u, g, frozen, cap);
    return {e, it, gn, gn < tol};
}

}  // namespace detail

/// Minimizes the discrete energy over the free nodes of `initial`, keeping
/// frozen nodes bit-exact. Restart k perturbs the best field with noise drawn
/// from (cfg.seed, k); the lowest energy over all runs is returned.
template <std::size_t Dim>
SolveResult<Dim> minimize_energy(const GridField<Dim>& initial, const EnergyOperator<Dim>& op, const SolverConfig& cfg) {
    cfg.validate();
    if (!initial.same_layout(op.layout()) || initial.frozen_mask() != op.layout().frozen_mask())
        throw GeometryMismatch("initial field does not match the energy operator's grid");
    const auto& frozen = initial.frozen_mask();

    SolveResult<Dim> best;
    best.field = initial;
    auto& bu = best.field.values();
    for (std::size_t k = 0; k < bu.size(); ++k)
        if (!frozen[k]) bu[k] = std::clamp(bu[k], -cfg.u_cap, cfg.u_cap);

    long used = 0;
    auto d = detail::descend(op, bu, cfg, cfg.max_iters);
    used += d.iters;
    best.value = d.value;
    best.final_grad_norm = d.grad_norm;
    best.converged = d.converged;

    for (int r = 1; r <= cfg.restarts && cfg.noise > 0.0; ++r) {
        std::mt19937_64 rng(mix64(cfg.seed ^ (0x51ed270b27c1a3f5ULL * static_cast<std::uint64_t>(r))));
        std::uniform_real_distribution<double> jitter(-cfg.noise, cfg.noise);
        std::vector<double> u = bu;
        for (std::size_t k = 0; k < u.size(); ++k)
            if (!frozen[k]) u[k] = std::clamp(u[k] + jitter(rng), -cfg.u_cap, cfg.u_cap);
        auto dr = detail::descend(op, u, cfg, cfg.max_iters);
        used += dr.iters;
        if (dr.value < best.value) {
            bu.swap(u);
            best.value = dr.value;
            best.final_grad_norm = dr.grad_norm;
            best.converged = dr.converged;
        }
    }
    best.iters = used;
    best.value = op.energy(bu);
    return best;
}

template <std::size_t Dim>
SolveResult<Dim> minimize_energy(const GridField<Dim>& initial, const Environment<Dim>& env, EnergyParams params,
                                 const SolverConfig& cfg) {
    if (params.variant == EnergyVariant::general) return minimize_energy(initial, EnergyOperator<Dim>(initial, env, params), cfg);
    return minimize_energy(initial, EnergyOperator<Dim>(initial, env.well(), env.spec().q, params), cfg);
}

/// Quintic C^2 cutoff: 1 for t <= 0, 0 for t >= 1.
inline double cutoff(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return 0.5 - 0.5 * TransitionProfile::value(t - 0.5);
}

/// Inner region A' of a gluing, a local box; the blend runs over a band of `width` outside it.
template <std::size_t Dim>
struct GlueRegion {
    Vec<Dim> lo{};
    Vec<Dim> hi{};
    double width = 1.0;
};

/// phi u + (1 - phi) v with phi = 1 on the inner box and 0 beyond the overlap band.
template <std::size_t Dim>
GridField<Dim> glue_fields(const GridField<Dim>& u, const GridField<Dim>& v, const GlueRegion<Dim>& region) {
    if (!u.same_layout(v)) throw GeometryMismatch("glued fields must share grid, spacing and orientation");
    if (region.width < 4.0 * u.h() * (1.0 - 1e-12)) throw GeometryMismatch("overlap must be at least 4h wide");
    GridField<Dim> out = u;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto s = u.local(k);
        double d = 0.0;
        for (std::size_t i = 0; i < Dim; ++i) d = std::max({d, region.lo[i] - s[i], s[i] - region.hi[i]});
        const double phi = cutoff(d / region.width);
        out[k] = phi == 1.0 ? u[k] : phi == 0.0 ? v[k] : phi * u[k] + (1.0 - phi) * v[k];
    }
    return out;
}

}  // namespace phasehom
