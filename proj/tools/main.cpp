// phasehom command-line driver.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "phasehom/harness/runner.hpp"

int main(int argc, char** argv) {
    using namespace phasehom;
    CLI::App app{"Cell problems and homogenized surface tension for random phase-field energies"};
    app.require_subcommand(1);

    std::string config_path;
    harness::RunOptions opts;
    std::uint64_t seed = 0;
    app.set_version_flag("--version", harness::kToolVersion);

    for (const char* name : {"sigma", "cell", "homogenize", "verify", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory (created if missing)");
        sub->add_option("--seed", seed, "override the environment seed");
        sub->add_option("--threads", opts.threads, "worker threads, 0 = all logical cores")->default_val(0);
        sub->add_option("--format", opts.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
        sub->add_flag("--timings", opts.timings, "add wall_ms to CSV output");
        sub->add_flag("--quiet", opts.quiet, "no progress output");
    }
    app.get_subcommand("sigma")->description("upper bounds for the comparison constants sigma+ and sigma-");
    app.get_subcommand("cell")->description("cell problems over nu_list x seeds x r_list x x0_list");
    app.get_subcommand("homogenize")->description("extrapolated f_hom per direction");
    app.get_subcommand("verify")->description("property suite with a verdict per property");
    app.get_subcommand("sweep")->description("anisotropy data: f_hom against the direction angle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const auto* sub = app.get_subcommands().front();
    for (const auto* s : app.get_subcommands())
        if (s->count("--seed")) opts.seed_override = true;
    opts.seed = seed;

    try {
        auto cfg = harness::load_config(config_path);
        harness::apply_overrides(cfg, opts);
        return harness::run_command(sub->get_name(), cfg, opts);
    } catch (const NumericalDivergence& e) {
        std::fprintf(stderr, "numerical divergence: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
