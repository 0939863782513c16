#pragma once

// Experiment configuration: INI-style text, one `key = value` per line under
// `[section]` headers, `#` or `;` comments. Lists are separated by commas or
// semicolons. Every key is optional; unknown sections and keys are rejected.
//
//   [problem]      dimension, potential, q, c1, c2, positivity_threshold
//   [environment]  kind, a_range, b_range, c_range, seed
//   [grid]         h, sigma_h, sigma_epsilons
//   [solver]       max_iters, grad_tol, step_rule, restarts, noise, u_cap, seed
//   [cell]         r_list, r_factor, fit_points, nu_list, seeds, x0_list,
//                  frame_width, abs_slack, rel_slack, monotonicity_epsilon,
//                  monotonicity_rho, positivity_sides, positivity_h, positivity_starts
//   [output]       dir, format

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../cell.hpp"

namespace phasehom::harness {

/// A direction as written in a config: an angle in degrees (n = 2) or an integer vector.
struct NuEntry {
    bool angle = true;
    double degrees = 0.0;
    std::vector<std::int64_t> p;
    std::string text;

    template <std::size_t Dim>
    Direction<Dim> make() const {
        if (angle) {
            if constexpr (Dim == 2) return Direction<Dim>::from_angle_degrees(degrees);
            else throw ConfigError("angles are only accepted for dimension 2: '" + text + "'");
        } else {
            if (p.size() != Dim) throw ConfigError("direction '" + text + "' has the wrong number of components");
            IVec<Dim> v{};
            for (std::size_t i = 0; i < Dim; ++i) v[i] = p[i];
            return Direction<Dim>::from_integer(v);
        }
    }
};

struct ExperimentConfig {
    int dimension = 2;
    std::string potential = "quartic";
    EnvironmentSpec env;
    SigmaConfig sigma;
    CellConfig cell;
    HomogenizeConfig homogenize;
    std::vector<NuEntry> nu_list;
    std::vector<std::vector<double>> x0_list{{0.0, 0.0}};
    double monotonicity_epsilon = 0.25;
    std::vector<double> monotonicity_rho{1.0, 2.0};
    std::vector<double> positivity_sides{1.0, 1.0};
    double positivity_h = 1.0 / 16.0;
    int positivity_starts = 3;
    std::string out_dir = "out";
    std::string format = "both";
    /// Raw text the config was parsed from, hashed into the run manifest.
    std::string source;

    template <std::size_t Dim>
    std::vector<Vec<Dim>> x0() const {
        std::vector<Vec<Dim>> out;
        for (const auto& x : x0_list) {
            Vec<Dim> v{};
            for (std::size_t i = 0; i < Dim; ++i) v[i] = x[i];
            out.push_back(v);
        }
        return out;
    }

    template <std::size_t Dim>
    std::vector<Direction<Dim>> directions() const {
        std::vector<Direction<Dim>> out;
        for (const auto& n : nu_list) out.push_back(n.make<Dim>());
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

/// Line number of each `section.key` in the source text.
inline std::map<std::string, int> key_lines(const std::string& text) {
    std::map<std::string, int> lines;
    std::istringstream in(text);
    std::string line, section;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos) lines[section + "." + trim(t.substr(0, eq))] = n;
    }
    return lines;
}

class Reader {
public:
    Reader(const boost::property_tree::ptree& tree, std::map<std::string, int> lines, std::string origin)
        : tree_(tree), lines_(std::move(lines)), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        const auto it = lines_.find(key);
        std::string where = origin_;
        if (it != lines_.end()) where += ":" + std::to_string(it->second);
        throw ConfigError(where + ": [" + key.substr(0, key.find('.')) + "] " + key.substr(key.find('.') + 1) + ": " +
                          msg);
    }

    bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }
    std::string raw(const std::string& key) const { return trim(tree_.get<std::string>(key)); }

    void text(const std::string& key, std::string& out) const {
        if (has(key)) out = raw(key);
    }

    void number(const std::string& key, double& out) const {
        if (has(key)) out = to_double(key, raw(key));
    }

    template <class Int>
    void integer(const std::string& key, Int& out) const {
        if (has(key)) out = static_cast<Int>(to_int(key, raw(key)));
    }

    void range(const std::string& key, Range& out) const {
        if (!has(key)) return;
        const auto parts = split(raw(key), " ,;\t");
        std::vector<double> v;
        for (const auto& p : parts)
            if (!p.empty()) v.push_back(to_double(key, p));
        if (v.size() == 1) v.push_back(v[0]);
        if (v.size() != 2) fail(key, "expected 'lo hi'");
        out = {v[0], v[1]};
    }

    void numbers(const std::string& key, std::vector<double>& out) const {
        if (!has(key)) return;
        out.clear();
        for (const auto& p : split(raw(key), ",;"))
            if (!p.empty()) out.push_back(to_double(key, p));
        if (out.empty()) fail(key, "list is empty");
    }

    void integers(const std::string& key, std::vector<std::uint64_t>& out) const {
        if (!has(key)) return;
        out.clear();
        for (const auto& p : split(raw(key), ",;")) {
            if (p.empty()) continue;
            const auto dash = p.find('-', 1);
            if (dash != std::string::npos) {
                const auto a = to_int(key, p.substr(0, dash));
                const auto b = to_int(key, p.substr(dash + 1));
                if (a < 0 || b < a) fail(key, "bad seed range '" + p + "'");
                for (auto s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
            } else {
                const auto s = to_int(key, p);
                if (s < 0) fail(key, "seeds must be nonnegative");
                out.push_back(static_cast<std::uint64_t>(s));
            }
        }
        if (out.empty()) fail(key, "list is empty");
    }

    void points(const std::string& key, std::vector<std::vector<double>>& out) const {
        if (!has(key)) return;
        out.clear();
        for (const auto& p : split(raw(key), ",;")) {
            if (p.empty()) continue;
            std::vector<double> v;
            for (const auto& c : split(p, " \t"))
                if (!c.empty()) v.push_back(to_double(key, c));
            out.push_back(v);
        }
        if (out.empty()) fail(key, "list is empty");
    }

    void directions(const std::string& key, std::vector<NuEntry>& out) const {
        if (!has(key)) return;
        out.clear();
        for (const auto& p : split(raw(key), ",;")) {
            if (p.empty()) continue;
            NuEntry e;
            e.text = p;
            std::vector<std::string> comps;
            for (const auto& c : split(p, " \t"))
                if (!c.empty()) comps.push_back(c);
            if (comps.size() == 1 && comps[0].find_first_of(".eE") != std::string::npos) {
                e.degrees = to_double(key, comps[0]);
            } else if (comps.size() == 1) {
                e.degrees = static_cast<double>(to_int(key, comps[0]));
                e.p = {to_int(key, comps[0])};
            } else {
                e.angle = false;
                for (const auto& c : comps) e.p.push_back(to_int(key, c));
            }
            out.push_back(e);
        }
        if (out.empty()) fail(key, "list is empty");
    }

private:
    double to_double(const std::string& key, const std::string& s) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        // fractions such as 1/128
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const double a = to_double(key, trim(s.substr(0, slash)));
            const double b = to_double(key, trim(s.substr(slash + 1)));
            if (b != 0.0) return a / b;
        }
        fail(key, "'" + s + "' is not a number");
    }

    std::int64_t to_int(const std::string& key, const std::string& s) const {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        fail(key, "'" + s + "' is not an integer");
    }

    const boost::property_tree::ptree& tree_;
    std::map<std::string, int> lines_;
    std::string origin_;
};

}  // namespace detail

/// Parses and validates a config; every failure is a ConfigError naming the line and key.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    {
        std::istringstream in(text);
        try {
            pt::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
        }
    }
    const detail::Reader r(tree, detail::key_lines(text), origin);

    static const std::map<std::string, std::set<std::string>> known{
        {"problem", {"dimension", "potential", "q", "c1", "c2", "positivity_threshold"}},
        {"environment", {"kind", "a_range", "b_range", "c_range", "seed"}},
        {"grid", {"h", "sigma_h", "sigma_epsilons"}},
        {"solver", {"max_iters", "grad_tol", "step_rule", "restarts", "noise", "u_cap", "seed"}},
        {"cell",
         {"r_list", "r_factor", "fit_points", "nu_list", "seeds", "x0_list", "frame_width", "abs_slack", "rel_slack",
          "monotonicity_epsilon", "monotonicity_rho", "positivity_sides", "positivity_h", "positivity_starts"}},
        {"output", {"dir", "format"}},
    };
    for (const auto& [section, keys] : tree) {
        const auto it = known.find(section);
        if (it == known.end()) throw ConfigError(origin + ": unknown section [" + section + "]");
        if (!keys.data().empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
        for (const auto& [key, value] : keys)
            if (!it->second.count(key)) r.fail(section + "." + key, "unknown key");
    }

    ExperimentConfig c;
    c.source = text;
    r.integer("problem.dimension", c.dimension);
    r.text("problem.potential", c.potential);
    r.number("problem.q", c.env.q);
    r.number("problem.c1", c.env.c1);
    r.number("problem.c2", c.env.c2);
    r.number("problem.positivity_threshold", c.sigma.positivity_threshold);

    std::string kind = to_string(c.env.kind);
    r.text("environment.kind", kind);
    try {
        c.env.kind = environment_kind_from_string(kind);
    } catch (const ConfigError& e) {
        r.fail("environment.kind", e.what());
    }
    const bool b_given = r.has("environment.b_range");
    r.range("environment.a_range", c.env.a);
    r.range("environment.b_range", c.env.b);
    r.range("environment.c_range", c.env.c);
    if (!b_given) c.env.b = {c.env.q, c.env.q};
    r.integer("environment.seed", c.env.seed);

    r.number("grid.h", c.cell.h);
    r.number("grid.sigma_h", c.sigma.h);
    r.numbers("grid.sigma_epsilons", c.sigma.epsilon_grid);

    r.integer("solver.max_iters", c.cell.solver.max_iters);
    r.number("solver.grad_tol", c.cell.solver.grad_tol);
    std::string rule = "bb";
    r.text("solver.step_rule", rule);
    if (rule == "bb" || rule == "adaptive") c.cell.solver.step_rule = StepRule::bb;
    else if (rule == "fixed") c.cell.solver.step_rule = StepRule::fixed;
    else r.fail("solver.step_rule", "expected 'bb' or 'fixed'");
    r.integer("solver.restarts", c.cell.solver.restarts);
    r.number("solver.noise", c.cell.solver.noise);
    r.number("solver.u_cap", c.cell.solver.u_cap);
    r.integer("solver.seed", c.cell.solver.seed);

    r.numbers("cell.r_list", c.homogenize.r_schedule);
    r.number("cell.r_factor", c.homogenize.r_factor);
    r.integer("cell.fit_points", c.homogenize.fit_points);
    r.directions("cell.nu_list", c.nu_list);
    c.homogenize.seeds = {c.env.seed};
    r.integers("cell.seeds", c.homogenize.seeds);
    r.points("cell.x0_list", c.x0_list);
    r.number("cell.frame_width", c.cell.frame_width);
    r.number("cell.abs_slack", c.cell.abs_slack);
    r.number("cell.rel_slack", c.cell.rel_slack);
    r.number("cell.monotonicity_epsilon", c.monotonicity_epsilon);
    r.numbers("cell.monotonicity_rho", c.monotonicity_rho);
    r.numbers("cell.positivity_sides", c.positivity_sides);
    r.number("cell.positivity_h", c.positivity_h);
    r.integer("cell.positivity_starts", c.positivity_starts);

    r.text("output.dir", c.out_dir);
    r.text("output.format", c.format);

    // validation
    if (c.dimension != 1 && c.dimension != 2) r.fail("problem.dimension", "only 1 and 2 are supported");
    if (c.potential != "quartic") r.fail("problem.potential", "only 'quartic' is available");
    try {
        c.env.validate();
    } catch (const ConfigError& e) {
        r.fail(r.has("environment.b_range") ? "environment.b_range" : "problem.q", e.what());
    }
    if (!(c.cell.h > 0.0) || c.cell.h > 0.25) r.fail("grid.h", "need 0 < h <= epsilon / 4 = 1/4");
    for (double e : c.sigma.epsilon_grid)
        if (!(e > 0.0 && e <= 1.0)) r.fail("grid.sigma_epsilons", "epsilons must lie in (0, 1]");
    double eps_min = 1.0;
    for (double e : c.sigma.epsilon_grid) eps_min = std::min(eps_min, e);
    if (!(c.sigma.h > 0.0) || c.sigma.h > eps_min / 4.0 * (1.0 + 1e-12))
        r.fail("grid.sigma_h", "need sigma_h <= min(sigma_epsilons) / 4");
    try {
        c.cell.solver.validate();
    } catch (const ConfigError& e) {
        r.fail("solver.max_iters", e.what());
    }
    if (c.homogenize.r_schedule.empty()) r.fail("cell.r_list", "list is empty");
    for (std::size_t i = 0; i < c.homogenize.r_schedule.size(); ++i) {
        if (c.homogenize.r_factor * c.homogenize.r_schedule[i] < 4.0) r.fail("cell.r_list", "every r must be >= 4");
        if (i > 0 && !(c.homogenize.r_schedule[i] > c.homogenize.r_schedule[i - 1]))
            r.fail("cell.r_list", "r values must increase");
    }
    if (c.homogenize.fit_points < 1) r.fail("cell.fit_points", "must be at least 1");
    if (!(c.cell.frame_width >= 0.0)) r.fail("cell.frame_width", "must be nonnegative");
    if (!(c.cell.abs_slack >= 0.0)) r.fail("cell.abs_slack", "must be nonnegative");
    if (!(c.cell.rel_slack >= 0.0)) r.fail("cell.rel_slack", "must be nonnegative");
    if (c.nu_list.empty()) {
        if (c.dimension == 2) {
            NuEntry e;
            e.degrees = 90.0;
            e.text = "90";
            c.nu_list.push_back(e);
        } else {
            NuEntry e;
            e.angle = false;
            e.p = {1};
            e.text = "1";
            c.nu_list.push_back(e);
        }
    }
    for (auto& n : c.nu_list) {
        if (c.dimension == 1 && n.angle) {
            if (n.p.size() != 1) r.fail("cell.nu_list", "dimension 1 takes directions 1 or -1");
            n.angle = false;
        }
        if (!n.angle && n.p.size() != static_cast<std::size_t>(c.dimension))
            r.fail("cell.nu_list", "direction '" + n.text + "' has the wrong number of components");
        try {
            if (c.dimension == 1) n.make<1>();
            else n.make<2>();
        } catch (const Error& e) {
            r.fail("cell.nu_list", e.what());
        }
    }
    for (auto& x : c.x0_list) {
        if (x.size() != static_cast<std::size_t>(c.dimension))
            r.fail("cell.x0_list", "every point needs " + std::to_string(c.dimension) + " coordinates");
    }
    if (!(c.monotonicity_epsilon > 0.0 && c.monotonicity_epsilon <= 1.0))
        r.fail("cell.monotonicity_epsilon", "must lie in (0, 1]");
    for (double rho : c.monotonicity_rho)
        if (rho < 4.0 * c.monotonicity_epsilon * (1.0 - 1e-12))
            r.fail("cell.monotonicity_rho", "every rho must be >= 4 monotonicity_epsilon");
    if (c.positivity_sides.size() != static_cast<std::size_t>(c.dimension))
        r.fail("cell.positivity_sides", "needs one side per dimension");
    for (double s : c.positivity_sides)
        if (s < 1.0) r.fail("cell.positivity_sides", "sides must be >= 1");
    if (!(c.positivity_h > 0.0) || c.positivity_h > 0.25) r.fail("cell.positivity_h", "need 0 < h <= 1/4");
    if (c.positivity_starts < 1) r.fail("cell.positivity_starts", "must be at least 1");
    if (c.format != "csv" && c.format != "json" && c.format != "both")
        r.fail("output.format", "expected csv, json or both");
    if (c.out_dir.empty()) r.fail("output.dir", "must not be empty");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str(), path);
}

}  // namespace phasehom::harness
