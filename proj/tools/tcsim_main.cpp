#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcsim/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Day-to-day tradable-credit and congestion-pricing simulator on a trip-based "
                 "single-reservoir network"};
    app.require_subcommand(1);

    tcsim::CliOptions options;
    options.workers = tcsim::default_worker_count();
    std::uint64_t seed_override = 0;
    int days_override = 0;
    std::vector<std::string> compare_configs;
    std::vector<double> endowments;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", options.config_path, "scenario config (JSON)")
                ->required();
        cmd->add_option("--out", options.out_dir, "output directory")->required();
        cmd->add_option("--seed", seed_override, "override the scenario seed");
        cmd->add_option("--days", days_override, "override the simulated horizon");
        cmd->add_flag("--quiet", options.quiet, "suppress progress output");
        cmd->add_option("--workers", options.workers,
                        "worker threads (default: TCSIM_WORKERS or hardware)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run one scenario to convergence");
    add_common(simulate, true);

    CLI::App* optimize = app.add_subcommand("optimize", "tune the toll profile with BO");
    add_common(optimize, true);

    CLI::App* compare = app.add_subcommand("compare", "run several scenarios on one population");
    compare->add_option("--config", compare_configs, "scenario configs (two or more)")
        ->required()
        ->expected(-2);
    add_common(compare, false);

    CLI::App* sweep = app.add_subcommand("sweep", "equilibrium price per endowment value");
    add_common(sweep, true);
    sweep->add_option("--endowments", endowments, "endowment values to sweep")
        ->required()
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    if (simulate->count("--seed") || optimize->count("--seed") || compare->count("--seed") ||
        sweep->count("--seed"))
        options.seed = seed_override;
    if (simulate->count("--days") || optimize->count("--days") || compare->count("--days") ||
        sweep->count("--days"))
        options.days = days_override;

    if (simulate->parsed()) return tcsim::cmd_simulate(options);
    if (optimize->parsed()) return tcsim::cmd_optimize(options);
    if (compare->parsed()) return tcsim::cmd_compare(compare_configs, options);
    if (sweep->parsed()) return tcsim::cmd_sweep(options, endowments);
    return 1;
}
