#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "core_math.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace phasehom {

enum class EnergyVariant {
    general,  ///< E_eps built from a random environment
    m_plus,   ///< W(u)/eps + q eps |grad u|^2 + eps^3 |hess u|^2
    m_minus,  ///< W(u)/eps - q eps |grad u|^2 + eps^3 |hess u|^2
};

struct EnergyParams {
    double epsilon = 1.0;
    EnergyVariant variant = EnergyVariant::general;
    /// Skip the h <= epsilon / 4 resolution gate (free-boundary positivity checks use eps = 1 anyway).
    bool allow_underresolved = false;
};

/// Discrete energy on a fixed grid layout:
///
///   E = h^n sum_p [ a_p W(u_p) / eps + b_p eps |D u|^2 + c_p eps^3 |D^2 u|^2 ]
///
/// over the interior nodes p, with coefficients looked up at y_p / eps. The
/// coefficients are frozen at construction, so one operator serves a whole solve.
template <std::size_t Dim>
class EnergyOperator {
public:
    /// General density of an environment.
    EnergyOperator(const GridField<Dim>& layout, const Environment<Dim>& env, EnergyParams params)
        : layout_(&layout), well_(env.well()), params_(params) {
        check_resolution();
        const auto& nodes = layout.interior();
        coef_.resize(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            auto y = layout.physical(static_cast<std::size_t>(nodes[k]));
            for (auto& v : y) v /= params.epsilon;
            coef_[k] = env.coefficients_at(y);
        }
        scale();
    }

    /// Comparison energies M+ / M- with gradient coefficient q.
    EnergyOperator(const GridField<Dim>& layout, const DoubleWell& well, double q, EnergyParams params)
        : layout_(&layout), well_(well), params_(params) {
        if (params.variant == EnergyVariant::general)
            throw ConfigError("comparison-energy constructor needs the m_plus or m_minus variant");
        check_resolution();
        const double b = params.variant == EnergyVariant::m_plus ? q : -q;
        coef_.assign(layout.interior().size(), Coefficients{1.0, b, 1.0});
        scale();
    }

    const GridField<Dim>& layout() const noexcept { return *layout_; }
    const EnergyParams& params() const noexcept { return params_; }

    /// Raw (unscaled) coefficients at interior node k.
    Coefficients coefficients(std::size_t k) const {
        const double hn = std::pow(layout_->h(), Dim);
        const double e = params_.epsilon;
        return {weights_[k].a * e / hn, weights_[k].b / (e * hn), weights_[k].c / (e * e * e * hn)};
    }

    /// Weighted integrand at interior node k; the energy is the sum of these.
    double node_energy(std::span<const double> u, std::size_t k) const {
        const auto& w = weights_[k];
        const auto* nb = layout_->neighbors(k);
        const auto p = static_cast<std::size_t>(layout_->interior()[k]);
        const double h = layout_->h();
        const double inv2h = 1.0 / (2.0 * h);
        const double invh2 = 1.0 / (h * h);
        const double up = u[p];
        double grad2 = 0.0;
        double hess2 = 0.0;
        for (std::size_t i = 0; i < Dim; ++i) {
            const double um = u[static_cast<std::size_t>(nb[2 * i])];
            const double upl = u[static_cast<std::size_t>(nb[2 * i + 1])];
            const double d1 = (upl - um) * inv2h;
            const double d2 = (upl - 2.0 * up + um) * invh2;
            grad2 += d1 * d1;
            hess2 += d2 * d2;
        }
        if constexpr (Dim == 2) {
            const double cross = (u[static_cast<std::size_t>(nb[7])] - u[static_cast<std::size_t>(nb[6])] -
                                  u[static_cast<std::size_t>(nb[5])] + u[static_cast<std::size_t>(nb[4])]) *
                                 0.25 * invh2;
            hess2 += 2.0 * cross * cross;
        }
        return w.a * well_.value(up) + w.b * grad2 + w.c * hess2;
    }

    double energy(std::span<const double> u) const {
        double e = 0.0;
        const std::size_t n = weights_.size();
        for (std::size_t k = 0; k < n; ++k) e += node_energy(u, k);
        return e;
    }

    /// Energy and its exact gradient with respect to every node value. Entries
    /// of frozen nodes are set to zero.
    double energy_and_gradient(std::span<const double> u, std::span<double> g) const {
        std::fill(g.begin(), g.end(), 0.0);
        const double h = layout_->h();
        const double inv2h = 1.0 / (2.0 * h);
        const double invh2 = 1.0 / (h * h);
        const auto& nodes = layout_->interior();
        double e = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            const auto& w = weights_[k];
            const auto* nb = layout_->neighbors(k);
            const auto p = static_cast<std::size_t>(nodes[k]);
            const double up = u[p];
            double grad2 = 0.0;
            double hess2 = 0.0;
            double center = w.a * well_.derivative(up);
            for (std::size_t i = 0; i < Dim; ++i) {
                const auto im = static_cast<std::size_t>(nb[2 * i]);
                const auto ip = static_cast<std::size_t>(nb[2 * i + 1]);
                const double d1 = (u[ip] - u[im]) * inv2h;
                const double d2 = (u[ip] - 2.0 * up + u[im]) * invh2;
                grad2 += d1 * d1;
                hess2 += d2 * d2;
                const double t1 = 2.0 * w.b * d1 * inv2h;
                const double t2 = 2.0 * w.c * d2 * invh2;
                g[ip] += t1 + t2;
                g[im] += t2 - t1;
                center -= 2.0 * t2;
            }
            if constexpr (Dim == 2) {
                const auto imm = static_cast<std::size_t>(nb[4]);
                const auto imp = static_cast<std::size_t>(nb[5]);
                const auto ipm = static_cast<std::size_t>(nb[6]);
                const auto ipp = static_cast<std::size_t>(nb[7]);
                const double cross = (u[ipp] - u[ipm] - u[imp] + u[imm]) * 0.25 * invh2;
                hess2 += 2.0 * cross * cross;
                const double t = 4.0 * w.c * cross * 0.25 * invh2;
                g[ipp] += t;
                g[imm] += t;
                g[ipm] -= t;
                g[imp] -= t;
            }
            g[p] += center;
            e += w.a * well_.value(up) + w.b * grad2 + w.c * hess2;
        }
        const auto& frozen = layout_->frozen_mask();
        for (std::size_t k = 0; k < g.size(); ++k)
            if (frozen[k]) g[k] = 0.0;
        return e;
    }

    /// Rough upper bound of the gradient's Lipschitz constant on |u| <= cap.
    double lipschitz_estimate(double cap) const {
        const double h = layout_->h();
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        for (const auto& w : weights_) {
            a = std::max(a, std::abs(w.a));
            b = std::max(b, std::abs(w.b));
            c = std::max(c, std::abs(w.c));
        }
        const double w2 = 12.0 * cap * cap + 4.0;  // sup |W''| on [-cap, cap] for the quartic
        const double stencil2 = 4.0 * Dim * Dim / (h * h * h * h);
        return a * w2 + 2.0 * b * Dim / (h * h) + 2.0 * c * (4.0 * stencil2);
    }

private:
    void check_resolution() const {
        if (!(params_.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (!params_.allow_underresolved && layout_->h() > params_.epsilon / 4.0 * (1.0 + 1e-12))
            throw ResolutionError("grid spacing h = " + std::to_string(layout_->h()) +
                                  " does not resolve epsilon = " + std::to_string(params_.epsilon) +
                                  " (need h <= epsilon / 4)");
    }

    void scale() {
        const double hn = std::pow(layout_->h(), Dim);
        const double e = params_.epsilon;
        weights_.resize(coef_.size());
        for (std::size_t k = 0; k < coef_.size(); ++k)
            weights_[k] = {coef_[k].a * hn / e, coef_[k].b * e * hn, coef_[k].c * e * e * e * hn};
        coef_.clear();
        coef_.shrink_to_fit();
    }

    const GridField<Dim>* layout_;
    DoubleWell well_;
    EnergyParams params_;
    std::vector<Coefficients> coef_;
    std::vector<Coefficients> weights_;
};

template <std::size_t Dim>
double discrete_energy(const GridField<Dim>& field, const Environment<Dim>& env, EnergyParams params) {
    if (params.variant == EnergyVariant::general)
        return EnergyOperator<Dim>(field, env, params).energy(field.values());
    return EnergyOperator<Dim>(field, env.well(), env.spec().q, params).energy(field.values());
}

/// Gradient with respect to the free node values (zeros on frozen nodes), indexed like field.values().
template <std::size_t Dim>
std::vector<double> discrete_energy_gradient(const GridField<Dim>& field, const Environment<Dim>& env,
                                             EnergyParams params) {
    std::vector<double> g(field.size());
    if (params.variant == EnergyVariant::general)
        EnergyOperator<Dim>(field, env, params).energy_and_gradient(field.values(), g);
    else
        EnergyOperator<Dim>(field, env.well(), env.spec().q, params).energy_and_gradient(field.values(), g);
    return g;
}

}  // namespace phasehom
