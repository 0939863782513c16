#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace phasehom {

/// Composite Simpson rule on [a, b]. The interval count is the smallest even
/// number whose spacing does not exceed `step`.
template <class F>
double simpson(F&& f, double a, double b, double step) {
    if (!(step > 0.0)) throw ConfigError("quadrature step must be positive");
    if (b <= a) return 0.0;
    auto n = static_cast<std::size_t>(std::ceil((b - a) / step - 1e-12));
    if (n < 2) n = 2;
    if (n % 2 != 0) ++n;
    const double dx = (b - a) / static_cast<double>(n);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double x = a + dx * static_cast<double>(i);
        (i % 2 != 0 ? odd : even) += f(x);
    }
    return dx / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Double-well potential vanishing exactly at the phases -1 and +1.
///
/// The quartic kind is W(s) = (s^2 - 1)^2. The tabulated kind interpolates
/// user samples linearly (extrapolating the end segments) and has no analytic
/// derivative, so it can be evaluated but not used by the gradient solver.
class DoubleWell {
public:
    enum class Kind { quartic, tabulated };

    DoubleWell() = default;

    static DoubleWell quartic() { return DoubleWell{}; }

    static DoubleWell tabulated(std::vector<std::pair<double, double>> samples, double c0) {
        if (samples.size() < 2) throw ConfigError("tabulated potential needs at least two samples");
        std::sort(samples.begin(), samples.end());
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (!(samples[i].first > samples[i - 1].first))
                throw ConfigError("tabulated potential abscissae must be distinct");
        }
        DoubleWell w;
        w.kind_ = Kind::tabulated;
        w.table_ = std::move(samples);
        w.c0_ = c0;
        return w;
    }

    Kind kind() const noexcept { return kind_; }

    /// Constant of the polynomial-growth hypothesis W(s) <= c0 W(t) + c0 for |s| <= |t|.
    double c0() const noexcept { return c0_; }

    double operator()(double s) const { return value(s); }

    double value(double s) const {
        if (kind_ == Kind::quartic) {
            const double t = s * s - 1.0;
            return t * t;
        }
        return interpolate(s);
    }

    double derivative(double s) const {
        if (kind_ != Kind::quartic) throw Unsupported("no analytic derivative for a tabulated potential");
        return 4.0 * s * (s * s - 1.0);
    }

private:
    double interpolate(double s) const {
        auto it = std::lower_bound(table_.begin(), table_.end(), s,
                                   [](const auto& p, double x) { return p.first < x; });
        std::size_t hi = static_cast<std::size_t>(it - table_.begin());
        hi = std::clamp<std::size_t>(hi, 1, table_.size() - 1);
        const auto& [x0, y0] = table_[hi - 1];
        const auto& [x1, y1] = table_[hi];
        return std::max(0.0, y0 + (y1 - y0) * (s - x0) / (x1 - x0));
    }

    Kind kind_ = Kind::quartic;
    double c0_ = 9.0;
    std::vector<std::pair<double, double>> table_;
};

/// The C^2 transition profile: -1 below t = -1/2, +1 above t = 1/2, and the
/// odd quintic smoothstep (15s - 10s^3 + 3s^5)/8 with s = 2t in between.
struct TransitionProfile {
    static double value(double t) {
        if (t >= 0.5) return 1.0;
        if (t <= -0.5) return -1.0;
        const double s = 2.0 * t;
        const double s2 = s * s;
        return s * (15.0 + s2 * (-10.0 + 3.0 * s2)) / 8.0;
    }

    static double first_derivative(double t) {
        if (t >= 0.5 || t <= -0.5) return 0.0;
        const double s = 2.0 * t;
        const double m = 1.0 - s * s;
        return 3.75 * m * m;
    }

    static double second_derivative(double t) {
        if (t >= 0.5 || t <= -0.5) return 0.0;
        const double s = 2.0 * t;
        return -30.0 * s * (1.0 - s * s);
    }
};

inline double eval_potential(const DoubleWell& w, double s) { return w.value(s); }
inline double eval_potential_derivative(const DoubleWell& w, double s) { return w.derivative(s); }
inline double eval_profile(double t) { return TransitionProfile::value(t); }

/// Energy of the fixed profile per unit cross-section:
/// C_eta(q) = integral of W(eta) + q |eta'|^2 + |eta''|^2 over the real line.
/// The integrand vanishes outside [-1/2, 1/2].
inline double compute_c_eta(const DoubleWell& w, double q, double step = 1e-4) {
    if (q < 0.0) throw ConfigError("C_eta requires q >= 0");
    return simpson(
        [&](double t) {
            const double d1 = TransitionProfile::first_derivative(t);
            const double d2 = TransitionProfile::second_derivative(t);
            return w.value(TransitionProfile::value(t)) + q * d1 * d1 + d2 * d2;
        },
        -0.5, 0.5, step);
}

/// Optimal first-order transition cost 2 sqrt(q) * integral_{-1}^{1} sqrt(W).
/// It bounds from below the cost of any transition of W + q|u'|^2 + |u''|^2.
inline double modica_mortola_sigma(const DoubleWell& w, double q, double step = 1e-4) {
    if (!(q > 0.0)) throw ConfigError("Modica-Mortola constant requires q > 0");
    return 2.0 * std::sqrt(q) * simpson([&](double s) { return std::sqrt(w.value(s)); }, -1.0, 1.0, step);
}

}  // namespace phasehom
