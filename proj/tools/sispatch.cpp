#include "sispatch/cli/commands.hpp"
#include "sispatch/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace sispatch;
using namespace sispatch::cli;

int exit_code(const Error& e)
{
    switch (category(e.code())) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Precondition: return 4;
    }
    return 3;
}

void emit(const ResultTable& t, const std::string& out_path)
{
    if (out_path.empty() || out_path == "-") {
        t.write_csv(std::cout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        throw Error(ErrorCode::ConfigError, "cannot write " + out_path);
    }
    t.write_csv(f);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Patch SIS model: R0, thresholds, equilibria, asymptotic profiles, simulation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string grid;
    CommandOptions opt;
    double tol = 0.0;
    double gamma_4 = 3.0;

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "scenario document (JSON)")->required();
    };
    auto with_out = [&](CLI::App* sub) { sub->add_option("--out", out, "output CSV path (default stdout)"); };
    auto with_grid = [&](CLI::App* sub) {
        sub->add_option("--grid", grid, "from:to:points:geometric|linear, overrides the config sweep");
        sub->add_option("--threads", opt.threads, "sweep workers (0 = hardware)");
    };

    auto* validate = app.add_subcommand("validate", "check a config and report the assumptions that hold");
    with_config(validate);

    auto* r0_cmd = app.add_subcommand("r0", "basic reproduction number, optionally over a dI grid");
    with_config(r0_cmd);
    with_out(r0_cmd);
    with_grid(r0_cmd);

    auto* profile = app.add_subcommand("profile", "h_j, thresholds, J+/J- and limiting S* over a dI grid");
    with_config(profile);
    with_out(profile);
    with_grid(profile);

    auto* equilibrium = app.add_subcommand("equilibrium", "endemic equilibrium");
    with_config(equilibrium);
    with_out(equilibrium);
    with_grid(equilibrium);

    auto* sim = app.add_subcommand("simulate", "integrate the full system");
    with_config(sim);
    with_out(sim);
    sim->add_option("--t-end", opt.t_end, "final time")->check(CLI::PositiveNumber);
    sim->add_option("--stride", opt.stride, "sampling interval")->check(CLI::PositiveNumber);
    sim->add_option("--tol", tol, "field norm counted as converged")->check(CLI::PositiveNumber);
    sim->add_option("--initial", opt.initial, "dfe, dfe-perturbed, uniform or config")
        ->check(CLI::IsMember({"dfe", "dfe-perturbed", "uniform", "config"}));

    auto* star = app.add_subcommand("star-example", "the four-patch star graph example");
    star->add_option("--out", out, "directory for the CSV bundle");
    star->add_option("--gamma4", gamma_4, "recovery rate of patch 4")->check(CLI::PositiveNumber);
    star->add_option("--threads", opt.threads, "sweep workers (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!grid.empty()) {
            opt.grid = parse_grid(grid);
        }
        if (tol > 0.0) {
            opt.tol = tol;
        }
        if (star->parsed()) {
            return cmd_star_example(std::cout, out.empty() ? std::nullopt : std::optional<std::string>(out),
                                    gamma_4, opt.threads);
        }
        const Scenario sc = load_scenario(config);
        if (validate->parsed()) {
            return cmd_validate(sc, std::cout, std::cerr);
        }
        if (r0_cmd->parsed()) {
            emit(cmd_r0(sc, opt), out);
        } else if (profile->parsed()) {
            emit(cmd_profile(sc, opt), out);
        } else if (equilibrium->parsed()) {
            emit(cmd_equilibrium(sc, opt, std::cerr), out);
        } else if (sim->parsed()) {
            emit(cmd_simulate(sc, opt, std::cerr), out);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
