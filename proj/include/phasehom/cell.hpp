#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "core_math.hpp"
#include "energy.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "minimize.hpp"
#include "parallel.hpp"

namespace phasehom {

struct CellConfig {
    /// Grid spacing of r-scaled (eps = 1) problems; eps-scaled problems use h * eps.
    double h = 0.25;
    /// Frozen frame width in units of eps. Zero selects max(2h, eps).
    double frame_width = 0.0;
    SolverConfig solver;
    double abs_slack = 1e-6;
    double rel_slack = 0.05;
    unsigned threads = 1;

    double frame_for(double eps, double grid_h) const {
        return frame_width > 0.0 ? frame_width * eps : std::max(2.0 * grid_h, eps);
    }
};

template <std::size_t Dim>
struct CellRecord {
    Vec<Dim> nu{};
    double nu_deg = 0.0;
    double r = 0.0;
    double rho = 0.0;
    double epsilon = 1.0;
    std::uint64_t seed = 0;
    int x0_index = 0;
    double m_hat = 0.0;
    double normalized = 0.0;
    long iters = 0;
    double grad_norm = 0.0;
    bool converged = false;
    double wall_ms = 0.0;
    std::string work_item;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

/// Sets every node to eta(s_n / eps) using the local normal coordinate of the grid.
template <std::size_t Dim>
void local_profile(GridField<Dim>& f, double eps) {
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = TransitionProfile::value(f.local(k)[Dim - 1] / eps);
}

template <std::size_t Dim>
std::string work_item(const Direction<Dim>& d, double r, std::uint64_t seed, int x0_index) {
    std::ostringstream s;
    s.precision(10);
    s << "nu=" << d.angle_degrees() << ";r=" << r << ";seed=" << seed << ";x0=" << x0_index;
    return s.str();
}

}  // namespace detail

/// Solves the profile-datum cell problem on Q_rho^nu(x) at scale eps:
/// minimize E_eps over fields equal to u^nu_{x,eps} near the boundary.
template <std::size_t Dim>
SolveResult<Dim> solve_profile_cell(const Environment<Dim>& env, const Direction<Dim>& d, double rho, double eps,
                                    const Vec<Dim>& x, const CellConfig& cfg) {
    const double h = cfg.h * eps;
    GridField<Dim> f(GridSpec<Dim>::cube(OrientedCube<Dim>::make(x, rho, d), h));
    detail::local_profile(f, eps);
    f.freeze_frame(cfg.frame_for(eps, h));
    EnergyOperator<Dim> op(f, env, EnergyParams{eps, EnergyVariant::general});
    return minimize_energy(f, op, cfg.solver);
}

/// Cell problem at eps = 1 on Q_r^nu(r x0); normalized = m_hat / r^{n-1}.
template <std::size_t Dim>
CellRecord<Dim> cell_problem_r(const Environment<Dim>& env, const Direction<Dim>& d, double r, const Vec<Dim>& x0,
                               const CellConfig& cfg, int x0_index = 0) {
    if (r < 4.0) throw ConfigError("cell problems need r >= 4");
    if (cfg.h > 0.25 * (1.0 + 1e-12)) throw ResolutionError("cell problems need h <= 1/4");
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = solve_profile_cell(env, d, r, 1.0, r * x0, cfg);
    CellRecord<Dim> rec;
    rec.nu = d.nu();
    rec.nu_deg = d.angle_degrees();
    rec.r = r;
    rec.rho = r;
    rec.seed = env.spec().seed;
    rec.x0_index = x0_index;
    rec.m_hat = res.value;
    rec.normalized = res.value / std::pow(r, Dim - 1);
    rec.iters = res.iters;
    rec.grad_norm = res.final_grad_norm;
    rec.converged = res.converged;
    rec.wall_ms = detail::elapsed_ms(t0);
    rec.work_item = detail::work_item(d, r, rec.seed, x0_index);
    return rec;
}

/// Cell problem at scale eps on Q_rho^nu(x) with grid spacing h * eps, so the
/// grid matches cell_problem_r at r = rho / eps node for node.
template <std::size_t Dim>
CellRecord<Dim> eps_scaled_cell(const Environment<Dim>& env, const Direction<Dim>& d, double rho, double eps,
                                const Vec<Dim>& x, const CellConfig& cfg, int x0_index = 0) {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    if (rho < 4.0 * eps * (1.0 - 1e-12)) throw ConfigError("eps-scaled cells need rho >= 4 eps");
    if (cfg.h > 0.25 * (1.0 + 1e-12)) throw ResolutionError("eps-scaled cells need h <= eps / 4");
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = solve_profile_cell(env, d, rho, eps, x, cfg);
    CellRecord<Dim> rec;
    rec.nu = d.nu();
    rec.nu_deg = d.angle_degrees();
    rec.r = rho / eps;
    rec.rho = rho;
    rec.epsilon = eps;
    rec.seed = env.spec().seed;
    rec.x0_index = x0_index;
    rec.m_hat = res.value;
    rec.normalized = res.value / std::pow(rho, Dim - 1);
    rec.iters = res.iters;
    rec.grad_norm = res.final_grad_norm;
    rec.converged = res.converged;
    rec.wall_ms = detail::elapsed_ms(t0);
    rec.work_item = detail::work_item(d, rec.r, rec.seed, x0_index);
    return rec;
}

// ---------------------------------------------------------------------------
// sigma constants

struct SigmaEstimate {
    EnergyVariant variant = EnergyVariant::m_plus;
    double value = INFINITY;
    double best_epsilon = 0.0;
    std::vector<double> epsilon_grid;
    std::vector<double> values;  ///< per resolved epsilon, NaN where skipped
    std::vector<std::string> warnings;
};

struct SigmaConfig {
    double h = 1.0 / 128.0;
    std::vector<double> epsilon_grid{0.5, 0.25, 0.125, 0.0625};
    SolverConfig solver;
    /// q at or above which M- is not expected to be bounded below.
    double positivity_threshold = 4.0;
};

/// Upper bound of sigma+ or sigma- on Q_1(0): laterally periodic fields that
/// are frozen at -1 / +1 near the bottom and top faces, minimized for each eps
/// of the grid from the profile eta(x_n / eps).
template <std::size_t Dim>
SigmaEstimate sigma_pm(EnergyVariant variant, const DoubleWell& well, double q, const SigmaConfig& cfg) {
    if (variant == EnergyVariant::general) throw ConfigError("sigma_pm needs the m_plus or m_minus variant");
    if (!(q > 0.0)) throw ConfigError("q must be positive");
    if (q >= cfg.positivity_threshold) throw ConfigError("q is outside the positivity regime");
    SigmaEstimate est;
    est.variant = variant;
    est.epsilon_grid = cfg.epsilon_grid;
    for (double eps : cfg.epsilon_grid) {
        if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("sigma epsilons must lie in (0, 1]");
        if (cfg.h > eps / 4.0 * (1.0 + 1e-12)) {
            est.values.push_back(NAN);
            est.warnings.push_back("epsilon " + std::to_string(eps) + " skipped: h > epsilon / 4");
            continue;
        }
        GridSpec<Dim> spec = GridSpec<Dim>::cube(OrientedCube<Dim>::make(Vec<Dim>{}, 1.0, Direction<Dim>::axis()), cfg.h);
        for (std::size_t i = 0; i < Dim - 1; ++i) spec.periodic[i] = true;
        GridField<Dim> f(spec);
        detail::local_profile(f, eps);
        f.freeze_end_caps(std::max(2.0 * cfg.h, eps / 2.0));
        EnergyOperator<Dim> op(f, well, q, EnergyParams{eps, variant});
        const auto res = minimize_energy(f, op, cfg.solver);
        est.values.push_back(res.value);
        if (res.value < est.value) {
            est.value = res.value;
            est.best_epsilon = eps;
        }
    }
    if (!std::isfinite(est.value)) throw ResolutionError("no epsilon of the grid is resolved by h");
    return est;
}

// ---------------------------------------------------------------------------
// subadditive process

template <std::size_t Dim>
struct MuSample {
    LatticeCuboid<Dim> cuboid;
    std::uint64_t seed = 0;
    double value = 0.0;
    double m_hat = 0.0;
    bool fallback = false;
    bool anomaly = false;
    long iters = 0;
};

/// Minimizer of E over int(T_nu R) with datum eta(x . nu) near the boundary.
template <std::size_t Dim>
SolveResult<Dim> solve_cuboid(const Environment<Dim>& env, const LatticeCuboid<Dim>& t, const CellConfig& cfg) {
    if (cfg.h > 0.25 * (1.0 + 1e-12)) throw ResolutionError("cuboid problems need h <= 1/4");
    GridField<Dim> f(GridSpec<Dim>::cuboid(t, cfg.h));
    detail::local_profile(f, 1.0);
    f.freeze_frame(cfg.frame_for(1.0, cfg.h));
    EnergyOperator<Dim> op(f, env, EnergyParams{1.0, EnergyVariant::general});
    return minimize_energy(f, op, cfg.solver);
}

/// mu_nu(omega, R): the cuboid infimum divided by M_nu^{n-1}, or c2 C_eta |R|
/// when a side of R is shorter than 1. Negative solver values beyond the slack
/// are clamped to zero and flagged.
template <std::size_t Dim>
MuSample<Dim> mu_nu(const Environment<Dim>& env, const LatticeCuboid<Dim>& t, const CellConfig& cfg,
                    GridField<Dim>* minimizer = nullptr) {
    MuSample<Dim> s{t};
    s.seed = env.spec().seed;
    if (!t.direction().rational()) throw LatticeIncompatible("mu_nu needs a rational direction");
    if (t.min_side() < 1.0) {
        s.fallback = true;
        s.value = env.spec().c2 * compute_c_eta(env.well(), env.spec().q) * t.area();
        s.m_hat = s.value * std::pow(t.m_nu(), Dim - 1);
        return s;
    }
    auto res = solve_cuboid(env, t, cfg);
    if (minimizer) *minimizer = std::move(res.field);
    s.m_hat = res.value;
    s.iters = res.iters;
    s.value = res.value / std::pow(t.m_nu(), Dim - 1);
    if (s.value < -cfg.abs_slack) {
        s.anomaly = true;
        s.value = 0.0;
    }
    return s;
}

struct SubadditivityReport {
    double glued = 0.0;  ///< energy of the glued competitor on T_nu R, divided by M^{n-1}
    double sum = 0.0;    ///< sum of mu over the pieces
    bool pass = false;
};

/// Builds the competitor of the subadditivity argument: the piece minimizers on
/// T_nu R_i, extended by the datum eta(x . nu) elsewhere, evaluated on T_nu R.
/// Piece corners must sit on the grid of T_nu R.
template <std::size_t Dim>
SubadditivityReport glued_subadditivity(const Environment<Dim>& env, const LatticeCuboid<Dim>& whole,
                                        const std::vector<LatticeCuboid<Dim>>& pieces, const CellConfig& cfg,
                                        double tol = 1e-9) {
    const double h = cfg.h;
    GridField<Dim> big(GridSpec<Dim>::cuboid(whole, h));
    detail::local_profile(big, 1.0);
    big.freeze_frame(cfg.frame_for(1.0, h));
    const double mn = std::pow(whole.m_nu(), Dim - 1);
    SubadditivityReport rep;
    for (const auto& p : pieces) {
        GridField<Dim> pf;
        const auto mu = mu_nu(env, p, cfg, &pf);
        rep.sum += mu.value;
        if (mu.fallback) continue;  // the datum itself is the competitor on this piece
        for (auto idx : pf.interior()) {
            const auto y = pf.physical(static_cast<std::size_t>(idx));
            const auto s = apply_transpose<Dim>(big.rotation(), y - big.spec().origin);
            std::array<int, Dim> m{};
            for (std::size_t i = 0; i < Dim; ++i) {
                const double c = (s[i] - big.spec().lo[i]) / h - 0.5;
                const auto mi = std::llround(c);
                if (std::abs(c - static_cast<double>(mi)) > 1e-6)
                    throw GeometryMismatch("piece grid is not aligned with the grid of T_nu R");
                m[i] = static_cast<int>(mi) + (big.periodic(i) ? 0 : 1);
            }
            big[big.flat_index(m)] = pf[static_cast<std::size_t>(idx)];
        }
    }
    EnergyOperator<Dim> op(big, env, EnergyParams{1.0, EnergyVariant::general});
    rep.glued = op.energy(big.values()) / mn;
    rep.pass = rep.glued <= rep.sum + tol;
    return rep;
}

// ---------------------------------------------------------------------------
// homogenized density

/// Least-squares fit of y = f + A / r; returns {f, A}.
inline std::pair<double, double> fit_inverse_r(const std::vector<double>& r, const std::vector<double>& y) {
    if (r.size() != y.size() || r.empty()) throw ConfigError("fit needs matching, nonempty samples");
    if (r.size() == 1) return {y[0], 0.0};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double x = 1.0 / r[i];
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {(sy - a * sx) / n, a};
}

struct SeedLimit {
    std::uint64_t seed = 0;
    std::vector<double> r;
    std::vector<double> normalized;  ///< x0-mean per r
    double limit = 0.0;
    double slope = 0.0;
    double x0_spread = 0.0;  ///< max |value(x0) - mean| / mean at the largest r
};

template <std::size_t Dim>
struct FHomEstimate {
    Vec<Dim> nu{};
    double nu_deg = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_ = 0.0;
    double max_x0_spread = 0.0;
    std::vector<SeedLimit> seeds;
    std::vector<CellRecord<Dim>> records;
    std::vector<std::string> warnings;
};

struct HomogenizeConfig {
    std::vector<double> r_schedule{8, 16, 32};
    /// r(t) = r_factor * t.
    double r_factor = 1.0;
    std::vector<std::uint64_t> seeds{0};
    int fit_points = 3;
};

inline void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
}

/// Per-seed sequences of x0-averaged normalized cell values, extrapolated in
/// 1/r over the largest fit_points radii, then pooled across seeds.
template <std::size_t Dim>
FHomEstimate<Dim> f_hom_estimate(const EnvironmentSpec& spec, const DoubleWell& well, const Direction<Dim>& d,
                                 const HomogenizeConfig& hc, const std::vector<Vec<Dim>>& x0_list,
                                 const CellConfig& cfg) {
    if (hc.seeds.empty()) throw ConfigError("f_hom_estimate needs at least one seed");
    if (x0_list.empty()) throw ConfigError("f_hom_estimate needs at least one x0");
    for (std::size_t i = 0; i < hc.r_schedule.size(); ++i) {
        if (hc.r_factor * hc.r_schedule[i] < 4.0) throw ConfigError("r schedule must be >= 4");
        if (i > 0 && !(hc.r_schedule[i] > hc.r_schedule[i - 1])) throw ConfigError("r schedule must increase");
    }
    struct Item {
        std::size_t seed, r, x0;
    };
    std::vector<Item> items;
    for (std::size_t s = 0; s < hc.seeds.size(); ++s)
        for (std::size_t r = 0; r < hc.r_schedule.size(); ++r)
            for (std::size_t x = 0; x < x0_list.size(); ++x) items.push_back({s, r, x});

    FHomEstimate<Dim> est;
    est.nu = d.nu();
    est.nu_deg = d.angle_degrees();
    est.records = parallel_map<CellRecord<Dim>>(items.size(), cfg.threads, [&](std::size_t i) {
        EnvironmentSpec es = spec;
        es.seed = hc.seeds[items[i].seed];
        Environment<Dim> env(es, well);
        return cell_problem_r(env, d, hc.r_factor * hc.r_schedule[items[i].r], x0_list[items[i].x0], cfg,
                              static_cast<int>(items[i].x0));
    });

    std::vector<double> limits;
    const std::size_t nx = x0_list.size();
    const std::size_t nr = hc.r_schedule.size();
    for (std::size_t s = 0; s < hc.seeds.size(); ++s) {
        SeedLimit sl;
        sl.seed = hc.seeds[s];
        for (std::size_t r = 0; r < nr; ++r) {
            std::vector<double> vals;
            for (std::size_t x = 0; x < nx; ++x) {
                const auto& rec = est.records[(s * nr + r) * nx + x];
                if (!rec.converged) est.warnings.push_back("solve not converged: " + rec.work_item);
                vals.push_back(rec.normalized);
            }
            double m = 0, sd = 0;
            mean_sd(vals, m, sd);
            sl.r.push_back(hc.r_factor * hc.r_schedule[r]);
            sl.normalized.push_back(m);
            if (r + 1 == nr) {
                for (double v : vals) sl.x0_spread = std::max(sl.x0_spread, std::abs(v - m) / std::abs(m));
            }
        }
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, hc.fit_points)), nr);
        const std::vector<double> fr(sl.r.end() - static_cast<long>(k), sl.r.end());
        const std::vector<double> fy(sl.normalized.end() - static_cast<long>(k), sl.normalized.end());
        std::tie(sl.limit, sl.slope) = fit_inverse_r(fr, fy);
        limits.push_back(sl.limit);
        est.max_x0_spread = std::max(est.max_x0_spread, sl.x0_spread);
        est.seeds.push_back(std::move(sl));
    }
    mean_sd(limits, est.mean, est.stddev);
    est.stderr_ = est.stddev / std::sqrt(static_cast<double>(limits.size()));
    return est;
}

struct ErgodicAverage {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_ = 0.0;
    std::vector<double> values;
};

/// Monte Carlo mean over seeds of the normalized cell value on Q_r^nu(0).
template <std::size_t Dim>
ErgodicAverage ergodic_average(const EnvironmentSpec& spec, const DoubleWell& well, const Direction<Dim>& d, double r,
                               const std::vector<std::uint64_t>& seeds, const CellConfig& cfg) {
    if (seeds.size() < 2) throw ConfigError("ergodic_average needs at least two seeds");
    ErgodicAverage out;
    out.values = parallel_map<double>(seeds.size(), cfg.threads, [&](std::size_t i) {
        EnvironmentSpec es = spec;
        es.seed = seeds[i];
        return cell_problem_r(Environment<Dim>(es, well), d, r, Vec<Dim>{}, cfg).normalized;
    });
    mean_sd(out.values, out.mean, out.stddev);
    out.stderr_ = out.stddev / std::sqrt(static_cast<double>(seeds.size()));
    return out;
}

// ---------------------------------------------------------------------------
// property checks

struct PositivityReport {
    double q = 0.0;
    double minimum = 0.0;
    std::vector<double> values;  ///< per random start
    bool in_regime = true;
    double oracle = NAN;  ///< analytic energy of the best delta sin(k x) competitor, when computed
    bool pass = false;
};

/// Energy of u = delta sin(k x1) under W - q|u'|^2 + |u''|^2 on a box of the given area,
/// for a box holding a whole number of periods.
inline double sine_competitor_energy(double delta, double k, double q, double area) {
    const double d2 = delta * delta;
    return area * ((1.0 - d2 + 0.375 * d2 * d2) - 0.5 * q * d2 * k * k + 0.5 * d2 * k * k * k * k);
}

/// Minimizes the free-boundary functional W(u) - q|grad u|^2 + |hess u|^2 on
/// the box [0, sides] from several random starts and reports the lowest value.
template <std::size_t Dim>
PositivityReport verify_positivity(double q, const Vec<Dim>& sides, double h, int starts, std::uint64_t seed,
                                   const SolverConfig& solver, double threshold = 4.0, double tol = 1e-6) {
    for (double s : sides)
        if (s < 1.0) throw ConfigError("positivity needs all sides >= 1");
    if (q < 0.0) throw ConfigError("q must be nonnegative");
    if (starts < 1) throw ConfigError("positivity needs at least one start");
    PositivityReport rep;
    rep.q = q;
    rep.in_regime = q < threshold;
    GridSpec<Dim> spec;
    spec.rotation = rotation_for(Direction<Dim>::axis());
    spec.hi = sides;
    spec.h = h;
    spec.free_ghosts = true;
    GridField<Dim> f(spec);
    EnergyParams params{1.0, EnergyVariant::m_minus, true};
    EnergyOperator<Dim> op(f, DoubleWell::quartic(), q, params);
    rep.minimum = INFINITY;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> start(-1.5, 1.5);
    for (int k = 0; k < starts; ++k) {
        GridField<Dim> u = f;
        for (auto& v : u.values()) v = start(rng);
        SolverConfig sc = solver;
        sc.seed = mix64(seed + static_cast<std::uint64_t>(k));
        const auto res = minimize_energy(u, op, sc);
        rep.values.push_back(res.value);
        rep.minimum = std::min(rep.minimum, res.value);
    }
    if (q > 0.0) {
        double area = 1.0;
        for (double s : sides) area *= s;
        // k^2 = q / 2 minimizes the gradient part; delta minimizes the quartic, capped like the solver.
        const double k = std::sqrt(q / 2.0);
        const double d2 = std::min((1.0 + q * q / 8.0) / 0.75, solver.u_cap * solver.u_cap);
        rep.oracle = sine_competitor_energy(std::sqrt(d2), k, q, area);
    }
    rep.pass = rep.minimum >= -tol;
    return rep;
}

struct BoundsReport {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

/// c1 sigma- (1 - slack) <= f_hom <= c2 sigma+ (1 + slack).
inline BoundsReport bounds_check(double f_hom, double sigma_minus, double sigma_plus, double c1, double c2,
                                 double slack = 0.05) {
    BoundsReport b;
    b.estimate = f_hom;
    b.lower = c1 * sigma_minus * (1.0 - slack);
    b.upper = c2 * sigma_plus * (1.0 + slack);
    b.pass = b.lower <= f_hom && f_hom <= b.upper;
    return b;
}

struct MonotonicityReport {
    std::vector<double> rho;
    std::vector<double> values;  ///< m_hat_eps(rho) - c2 C_eta rho^{n-1}
    bool pass = false;
};

/// The sequence rho -> m_hat_eps(Q_rho) - c2 C_eta rho^{n-1} should not increase.
template <std::size_t Dim>
MonotonicityReport monotonicity_check(const Environment<Dim>& env, const Direction<Dim>& d, double eps,
                                      const std::vector<double>& rho_list, const CellConfig& cfg,
                                      double rel_slack = 0.02) {
    MonotonicityReport rep;
    const double c = env.spec().c2 * compute_c_eta(env.well(), env.spec().q);
    const auto recs = parallel_map<CellRecord<Dim>>(rho_list.size(), cfg.threads, [&](std::size_t i) {
        return eps_scaled_cell(env, d, rho_list[i], eps, Vec<Dim>{}, cfg);
    });
    rep.pass = true;
    for (std::size_t i = 0; i < rho_list.size(); ++i) {
        rep.rho.push_back(rho_list[i]);
        rep.values.push_back(recs[i].m_hat - c * std::pow(rho_list[i], Dim - 1));
        if (i > 0 && rep.values[i] > rep.values[i - 1] + rel_slack * std::abs(rep.values[i - 1])) rep.pass = false;
    }
    return rep;
}

}  // namespace phasehom
