#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "io.hpp"

namespace phasehom::harness {

struct RunOptions {
    std::string out_dir;        ///< overrides the config when nonempty
    std::string format;         ///< overrides the config when nonempty
    bool seed_override = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;       ///< 0 means all logical cores
    bool timings = false;       ///< add wall_ms to the CSV (breaks byte-identical reruns)
    bool quiet = false;
};

enum class Verdict { pass, fail, outside_regime, skipped };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "FAIL";
        case Verdict::outside_regime: return "outside regime";
        case Verdict::skipped: return "skipped";
    }
    return "?";
}

struct PropertyResult {
    std::string name;
    Verdict verdict = Verdict::pass;
    std::string detail;
};

/// Applies command-line overrides to a parsed config.
inline void apply_overrides(ExperimentConfig& c, const RunOptions& o) {
    if (!o.out_dir.empty()) c.out_dir = o.out_dir;
    if (!o.format.empty()) {
        if (o.format != "csv" && o.format != "json" && o.format != "both")
            throw ConfigError("--format must be csv, json or both");
        c.format = o.format;
    }
    if (o.seed_override) {
        c.env.seed = o.seed;
        c.homogenize.seeds = {o.seed};
    }
    c.cell.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
}

class Run {
public:
    Run(const ExperimentConfig& c, const RunOptions& o, std::string command) : cfg_(c), opts_(o) {
        manifest_.command = std::move(command);
        std::string key = c.source + "\n#seed=" + std::to_string(c.env.seed) + "\n#seeds=";
        for (auto s : c.homogenize.seeds) key += std::to_string(s) + ",";
        manifest_.config_hash = fnv1a(key);
        manifest_.started = iso_now();
        manifest_.threads = c.cell.threads;
        ensure_dir(c.out_dir);
    }

    bool csv() const { return cfg_.format != "json"; }
    bool json() const { return cfg_.format != "csv"; }
    std::string path(const std::string& name) const { return (std::filesystem::path(cfg_.out_dir) / name).string(); }

    void log(const std::string& line) const {
        if (!opts_.quiet) std::printf("%s\n", line.c_str());
    }

    RunManifest& manifest() { return manifest_; }

    void finish() {
        manifest_.finished = iso_now();
        write_file(path("manifest.json"), manifest_.to_json().dump(2) + "\n");
    }

    const ExperimentConfig& cfg_;
    const RunOptions& opts_;

private:
    RunManifest manifest_;
};

namespace detail {

inline std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

template <std::size_t Dim>
std::vector<Direction<Dim>> sweep_directions(const ExperimentConfig& c) {
    if constexpr (Dim == 2) {
        if (c.nu_list.size() > 1) return c.directions<Dim>();
        std::vector<Direction<Dim>> out;
        for (int k = 0; k < 8; ++k) out.push_back(Direction<Dim>::from_angle_degrees(22.5 * k));
        return out;
    } else {
        throw Unsupported("the anisotropy sweep needs dimension 2");
    }
}

template <std::size_t Dim>
Direction<Dim> lattice_direction(const ExperimentConfig& c) {
    for (const auto& d : c.directions<Dim>())
        if (d.rational()) return d;
    return Direction<Dim>::axis();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// subcommands

template <std::size_t Dim>
int run_sigma(Run& run) {
    const auto& c = run.cfg_;
    const auto well = DoubleWell::quartic();
    SigmaConfig sc = c.sigma;
    sc.solver = c.cell.solver;
    std::vector<SigmaEstimate> est;
    for (auto v : {EnergyVariant::m_minus, EnergyVariant::m_plus}) est.push_back(sigma_pm<Dim>(v, well, c.env.q, sc));
    std::string csv = "variant,epsilon,value\n";
    nlohmann::json j = {{"q", c.env.q}, {"dimension", Dim}, {"c_eta", compute_c_eta(well, c.env.q)}};
    for (const auto& e : est) {
        const char* name = e.variant == EnergyVariant::m_plus ? "plus" : "minus";
        for (std::size_t i = 0; i < e.epsilon_grid.size(); ++i)
            if (std::isfinite(e.values[i])) csv += std::string(name) + "," + num(e.epsilon_grid[i]) + "," + num(e.values[i]) + "\n";
        j[std::string("sigma_") + name] = sigma_json(e);
        run.log(std::string("sigma_") + name + " = " + num(e.value) + " (eps " + num(e.best_epsilon) + ")");
    }
    if (run.csv()) write_file(run.path("sigma.csv"), csv);
    if (run.json()) write_file(run.path("sigma.json"), j.dump(2) + "\n");
    run.finish();
    return 0;
}

template <std::size_t Dim>
int run_cell(Run& run) {
    const auto& c = run.cfg_;
    struct Item {
        Direction<Dim> d;
        std::uint64_t seed;
        double r;
        std::size_t x0;
    };
    std::vector<Item> items;
    const auto x0 = c.x0<Dim>();
    for (const auto& d : c.directions<Dim>())
        for (auto s : c.homogenize.seeds)
            for (double r : c.homogenize.r_schedule)
                for (std::size_t x = 0; x < x0.size(); ++x) items.push_back({d, s, c.homogenize.r_factor * r, x});
    const auto recs = parallel_map<CellRecord<Dim>>(items.size(), c.cell.threads, [&](std::size_t i) {
        EnvironmentSpec es = c.env;
        es.seed = items[i].seed;
        return cell_problem_r(Environment<Dim>(es), items[i].d, items[i].r, x0[items[i].x0], c.cell,
                              static_cast<int>(items[i].x0));
    });
    for (const auto& r : recs) run.log(r.work_item + " normalized=" + num(r.normalized));
    if (run.csv()) write_file(run.path("cells.csv"), records_csv(recs, run.opts_.timings));
    if (run.json()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : recs) j.push_back(record_json(r));
        write_file(run.path("cells.json"), j.dump(2) + "\n");
    }
    run.manifest().add(recs);
    run.finish();
    return 0;
}

template <std::size_t Dim>
std::vector<FHomEstimate<Dim>> estimate_directions(Run& run, const std::vector<Direction<Dim>>& dirs) {
    const auto& c = run.cfg_;
    std::vector<FHomEstimate<Dim>> out;
    for (const auto& d : dirs) {
        out.push_back(f_hom_estimate<Dim>(c.env, DoubleWell::quartic(), d, c.homogenize, c.x0<Dim>(), c.cell));
        const auto& e = out.back();
        run.log("nu " + num(e.nu_deg) + " deg: f_hom = " + num(e.mean) + " +- " + num(e.stderr_));
        for (const auto& w : e.warnings) run.log("  warning: " + w);
        run.manifest().add(e.records);
    }
    return out;
}

template <std::size_t Dim>
void write_estimates(Run& run, const std::vector<FHomEstimate<Dim>>& est) {
    std::vector<CellRecord<Dim>> all;
    std::string csv = "nu_deg,f_hom,stderr,stddev,max_x0_spread,seeds\n";
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : est) {
        all.insert(all.end(), e.records.begin(), e.records.end());
        csv += num(e.nu_deg) + "," + num(e.mean) + "," + num(e.stderr_) + "," + num(e.stddev) + "," +
               num(e.max_x0_spread) + "," + std::to_string(e.seeds.size()) + "\n";
        nlohmann::json seeds = nlohmann::json::array();
        for (const auto& s : e.seeds)
            seeds.push_back({{"seed", s.seed},
                             {"r", s.r},
                             {"normalized", s.normalized},
                             {"limit", s.limit},
                             {"slope", s.slope},
                             {"x0_spread", s.x0_spread}});
        j.push_back({{"nu_deg", e.nu_deg},
                     {"nu", e.nu},
                     {"f_hom", e.mean},
                     {"stderr", e.stderr_},
                     {"stddev", e.stddev},
                     {"max_x0_spread", e.max_x0_spread},
                     {"extrapolation", "normalized(r) = f + A / r"},
                     {"seeds", seeds},
                     {"warnings", e.warnings}});
    }
    if (run.csv()) {
        write_file(run.path("cells.csv"), records_csv(all, run.opts_.timings));
        write_file(run.path("fhom.csv"), csv);
    }
    if (run.json()) write_file(run.path("fhom.json"), j.dump(2) + "\n");
}

template <std::size_t Dim>
int run_homogenize(Run& run) {
    const auto est = estimate_directions<Dim>(run, run.cfg_.directions<Dim>());
    write_estimates(run, est);
    run.finish();
    return 0;
}

template <std::size_t Dim>
int run_sweep(Run& run) {
    const auto est = estimate_directions<Dim>(run, detail::sweep_directions<Dim>(run.cfg_));
    write_estimates(run, est);
    std::string dat = "# nu_deg f_hom stderr x y\n";
    for (const auto& e : est) {
        const double t = e.nu_deg * M_PI / 180.0;
        dat += num(e.nu_deg) + " " + num(e.mean) + " " + num(e.stderr_) + " " + num(e.mean * std::cos(t)) + " " +
               num(e.mean * std::sin(t)) + "\n";
    }
    write_file(run.path("anisotropy.dat"), dat);
    run.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// property suite

template <std::size_t Dim>
PropertyResult check_gradient(const ExperimentConfig& c) {
    Environment<Dim> env(c.env);
    std::mt19937_64 rng(mix64(c.env.seed + 101));
    std::uniform_real_distribution<double> val(-1.5, 1.5);
    double worst = 0.0;
    const auto dirs = c.directions<Dim>();
    for (int f = 0; f < 6; ++f) {
        const auto& d = dirs[static_cast<std::size_t>(f) % dirs.size()];
        Vec<Dim> x{};
        x[0] = 0.37 * f;
        GridField<Dim> u(GridSpec<Dim>::cube(OrientedCube<Dim>::make(x, 4.0, d), c.cell.h));
        for (auto& v : u.values()) v = val(rng);
        const auto variant = static_cast<EnergyVariant>(f % 3);
        const EnergyParams p{1.0, variant};
        const auto op = variant == EnergyVariant::general ? EnergyOperator<Dim>(u, env, p)
                                                          : EnergyOperator<Dim>(u, env.well(), c.env.q, p);
        std::vector<double> g(u.size());
        op.energy_and_gradient(u.values(), g);
        double gmax = 0.0, umax = 0.0;
        for (double x2 : g) gmax = std::max(gmax, std::abs(x2));
        for (double x2 : u.values()) umax = std::max(umax, std::abs(x2));
        const double step = 1e-6 * std::max(1.0, umax);
        auto w = u.values();
        for (auto idx : u.interior()) {
            const auto k = static_cast<std::size_t>(idx);
            const double keep = w[k];
            w[k] = keep + step;
            const double ep = op.energy(w);
            w[k] = keep - step;
            const double em = op.energy(w);
            w[k] = keep;
            worst = std::max(worst, std::abs((ep - em) / (2.0 * step) - g[k]) / gmax);
        }
    }
    return {"gradient check", worst < 1e-5 ? Verdict::pass : Verdict::fail,
            detail::fmt("max relative error %.2e (limit 1e-5)", worst)};
}

template <std::size_t Dim>
PropertyResult check_growth(const ExperimentConfig& c) {
    Environment<Dim> env(c.env);
    const auto rep = verify_growth_bounds(env, 20000, mix64(c.env.seed + 7));
    // nodal form on random grid fields
    std::mt19937_64 rng(mix64(c.env.seed + 8));
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    long bad = 0;
    const auto d = c.directions<Dim>().front();
    for (int f = 0; f < 20; ++f) {
        Vec<Dim> x{};
        x[0] = 1.3 * f;
        GridField<Dim> u(GridSpec<Dim>::cube(OrientedCube<Dim>::make(x, 4.0, d), c.cell.h));
        for (auto& v : u.values()) v = val(rng);
        const EnergyOperator<Dim> e(u, env, {1.0});
        const EnergyOperator<Dim> lo(u, env.well(), c.env.q, {1.0, EnergyVariant::m_minus});
        const EnergyOperator<Dim> hi(u, env.well(), c.env.q, {1.0, EnergyVariant::m_plus});
        for (std::size_t k = 0; k < u.interior().size(); ++k) {
            const double v = e.node_energy(u.values(), k);
            const double l = c.env.c1 * lo.node_energy(u.values(), k);
            const double h = c.env.c2 * hi.node_energy(u.values(), k);
            const double tol = 1e-13 * (std::abs(v) + std::abs(l) + std::abs(h));
            if (l > v + tol || v > h + tol) ++bad;
        }
    }
    const bool ok = rep.pass() && bad == 0;
    return {"growth sandwich", ok ? Verdict::pass : Verdict::fail,
            detail::fmt("%.0f pointwise and %.0f nodal violations", static_cast<double>(rep.counterexamples.size()),
                        static_cast<double>(bad))};
}

template <std::size_t Dim>
PropertyResult check_positivity(const ExperimentConfig& c) {
    if (c.env.q >= c.sigma.positivity_threshold)
        return {"positivity", Verdict::outside_regime,
                detail::fmt("q = %g is at or above the positivity threshold %g", c.env.q, c.sigma.positivity_threshold)};
    Vec<Dim> sides{};
    for (std::size_t i = 0; i < Dim; ++i) sides[i] = c.positivity_sides[i];
    const auto rep = verify_positivity<Dim>(c.env.q, sides, c.positivity_h, c.positivity_starts,
                                            mix64(c.env.seed + 3), c.cell.solver, c.sigma.positivity_threshold,
                                            c.cell.abs_slack);
    return {"positivity", rep.pass ? Verdict::pass : Verdict::fail,
            detail::fmt("minimum %.3e over %g starts (limit -%g)", rep.minimum, c.positivity_starts, c.cell.abs_slack)};
}

template <std::size_t Dim>
std::vector<PropertyResult> check_lattice(const ExperimentConfig& c) {
    std::vector<PropertyResult> out;
    if constexpr (Dim == 1) {
        for (const char* n : {"mu bounds", "subadditivity", "stationarity"})
            out.push_back({n, Verdict::skipped, "needs dimension 2"});
    } else {
        Environment<Dim> env(c.env);
        const auto d = detail::lattice_direction<Dim>(c);
        const double ceta = compute_c_eta(env.well(), c.env.q);
        bool ok = true;
        double lo = INFINITY, hi_ratio = 0.0;
        for (const auto& base : {std::pair{0.0, 0.5}, std::pair{0.0, 1.0}, std::pair{-1.0, 1.0}}) {
            const LatticeCuboid<Dim> t({base}, d);
            const auto mu = mu_nu(env, t, c.cell);
            const double cap = c.env.c2 * ceta * t.area();
            lo = std::min(lo, mu.value);
            hi_ratio = std::max(hi_ratio, mu.value / cap);
            ok = ok && !mu.anomaly && mu.value >= -c.cell.abs_slack && mu.value <= cap * (1.0 + c.cell.rel_slack);
        }
        out.push_back({"mu bounds", ok ? Verdict::pass : Verdict::fail,
                       detail::fmt("min mu %.4g, max mu / (c2 C_eta area) %.4f", lo, hi_ratio)});

        const LatticeCuboid<Dim> whole({std::pair{0.0, 4.0}}, d);
        std::vector<LatticeCuboid<Dim>> pieces{LatticeCuboid<Dim>({std::pair{0.0, 1.5}}, d),
                                               LatticeCuboid<Dim>({std::pair{1.5, 2.0}}, d),
                                               LatticeCuboid<Dim>({std::pair{2.0, 4.0}}, d)};
        const auto sub = glued_subadditivity(env, whole, pieces, c.cell);
        out.push_back({"subadditivity", sub.pass ? Verdict::pass : Verdict::fail,
                       detail::fmt("glued %.8f vs sum %.8f", sub.glued, sub.sum)});

        const LatticeCuboid<Dim> r({std::pair{0.0, 1.0}}, d);
        double worst = 0.0;
        for (std::int64_t z : {1, -2, 5}) {
            const auto a = mu_nu(env.shifted(r.shift_vector({z})), r, c.cell);
            const auto b = mu_nu(env, r.translated({z}), c.cell);
            worst = std::max(worst, std::abs(a.value - b.value) / std::max(1e-300, std::abs(b.value)));
        }
        out.push_back({"stationarity", worst <= 1e-9 ? Verdict::pass : Verdict::fail,
                       detail::fmt("max relative difference %.2e (limit 1e-9)", worst)});
    }
    return out;
}

template <std::size_t Dim>
std::vector<PropertyResult> check_homogenized(Run& run) {
    const auto& c = run.cfg_;
    std::vector<PropertyResult> out;
    const auto d = c.directions<Dim>().front();
    const auto est = f_hom_estimate<Dim>(c.env, DoubleWell::quartic(), d, c.homogenize, c.x0<Dim>(), c.cell);
    run.manifest().add(est.records);
    double min_norm = INFINITY;
    for (const auto& r : est.records) min_norm = std::min(min_norm, r.normalized);
    out.push_back({"cell values nonnegative", min_norm >= -c.cell.abs_slack ? Verdict::pass : Verdict::fail,
                   detail::fmt("min normalized %.4g", min_norm)});
    if (c.x0_list.size() > 1)
        out.push_back({"x-independence", est.max_x0_spread <= 0.03 ? Verdict::pass : Verdict::fail,
                       detail::fmt("max spread %.4f at the largest r (limit 0.03)", est.max_x0_spread)});
    if (c.env.q >= c.sigma.positivity_threshold) {
        out.push_back({"bounds", Verdict::outside_regime, "sigma- is not defined at this q"});
    } else {
        SigmaConfig sc = c.sigma;
        sc.solver = c.cell.solver;
        const double sm = sigma_pm<Dim>(EnergyVariant::m_minus, DoubleWell::quartic(), c.env.q, sc).value;
        const double sp = sigma_pm<Dim>(EnergyVariant::m_plus, DoubleWell::quartic(), c.env.q, sc).value;
        const auto b = bounds_check(est.mean, sm, sp, c.env.c1, c.env.c2, c.cell.rel_slack);
        out.push_back({"bounds", b.pass ? Verdict::pass : Verdict::fail,
                       detail::fmt("f_hom %.5f in [%.5f, %.5f]", est.mean, b.lower, b.upper)});
        const bool ordered = sm <= sp + c.cell.abs_slack && sp <= compute_c_eta(DoubleWell::quartic(), c.env.q) + c.cell.abs_slack;
        out.push_back({"sigma ordering", ordered ? Verdict::pass : Verdict::fail,
                       detail::fmt("sigma- %.5f <= sigma+ %.5f <= C_eta", sm, sp)});
    }
    Environment<Dim> env(c.env);
    const auto mono = monotonicity_check(env, d, c.monotonicity_epsilon, c.monotonicity_rho, c.cell, c.cell.rel_slack);
    std::string seq;
    for (double v : mono.values) seq += " " + num(v);
    out.push_back({"monotonicity", mono.pass ? Verdict::pass : Verdict::fail, "sequence" + seq});
    return out;
}

template <std::size_t Dim>
int run_verify(Run& run) {
    const auto& c = run.cfg_;
    std::vector<PropertyResult> all;
    auto add = [&](PropertyResult r) {
        run.log(std::string("[") + to_string(r.verdict) + "] " + r.name + ": " + r.detail);
        all.push_back(std::move(r));
    };
    add(check_gradient<Dim>(c));
    add(check_growth<Dim>(c));
    add(check_positivity<Dim>(c));
    for (auto& r : check_lattice<Dim>(c)) add(std::move(r));
    for (auto& r : check_homogenized<Dim>(run)) add(std::move(r));

    bool failed = false;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : all) {
        failed = failed || r.verdict == Verdict::fail;
        j.push_back({{"property", r.name}, {"verdict", to_string(r.verdict)}, {"detail", r.detail}});
    }
    if (run.json()) write_file(run.path("verify.json"), nlohmann::json{{"properties", j}, {"pass", !failed}}.dump(2) + "\n");
    if (run.csv()) {
        std::string csv = "property,verdict\n";
        for (const auto& r : all) csv += r.name + "," + to_string(r.verdict) + "\n";
        write_file(run.path("verify.csv"), csv);
    }
    run.finish();
    return failed ? 1 : 0;
}

/// Dispatches a subcommand on the configured dimension.
inline int run_command(const std::string& command, const ExperimentConfig& c, const RunOptions& o) {
    Run run(c, o, command);
    auto go = [&]<std::size_t Dim>() {
        if (command == "sigma") return run_sigma<Dim>(run);
        if (command == "cell") return run_cell<Dim>(run);
        if (command == "homogenize") return run_homogenize<Dim>(run);
        if (command == "sweep") return run_sweep<Dim>(run);
        if (command == "verify") return run_verify<Dim>(run);
        throw ConfigError("unknown command '" + command + "'");
    };
    return c.dimension == 1 ? go.template operator()<1>() : go.template operator()<2>();
}

}  // namespace phasehom::harness
