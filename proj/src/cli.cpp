#include "tcsim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "tcsim/bayesopt.hpp"
#include "tcsim/day2day.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ScenarioConfig load_with_overrides(const CliOptions& options, const std::string& path) {
    ScenarioConfig cfg = load_scenario(path);
    if (options.seed) {
        cfg.seed = *options.seed;
        cfg.population.seed = *options.seed;
    }
    if (options.days) cfg.days = *options.days;
    return cfg;
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);
}

std::string day_tag(int day) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%02d", day);
    return buf;
}

// days.csv + per-day traces + snapshot + summary + manifest for one run.
void emit_run_outputs(const ScenarioConfig& cfg, const RunResult& result, Simulation& sim,
                      const std::string& out_dir, const std::string& started) {
    std::vector<std::string> outputs;
    auto open = [&](const std::string& name) {
        std::ofstream out(out_dir + "/" + name);
        if (!out) throw std::runtime_error("cannot write " + out_dir + "/" + name);
        outputs.push_back(name);
        return out;
    };

    {
        auto out = open("days.csv");
        write_days_csv(out, result.records);
    }
    for (const DayRecord& rec : result.records) {
        if (!rec.detail) continue;
        {
            auto out = open("accumulation_" + day_tag(rec.day) + ".csv");
            write_accumulation_csv(out, rec.detail->trajectory);
        }
        {
            auto out = open("departures_" + day_tag(rec.day) + ".csv");
            write_departure_histogram_csv(out, rec.detail->chosen_departure);
        }
        {
            auto out = open("trips_" + day_tag(rec.day) + ".csv");
            write_trips_csv(out, rec.detail->trajectory);
        }
    }
    {
        auto out = open("population.csv");
        write_population_records(out, sim.population());
    }
    sim.save_snapshot(out_dir + "/state.snapshot");
    outputs.push_back("state.snapshot");
    {
        auto out = open("summary.json");
        write_summary_json(out, cfg, result);
    }
    write_manifest(out_dir, cfg, outputs, started, iso8601_utc_now());
}

}  // namespace

int default_worker_count() {
    if (const char* env = std::getenv("TCSIM_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_simulate(const CliOptions& options) {
    try {
        const std::string started = iso8601_utc_now();
        const ScenarioConfig cfg = load_with_overrides(options, options.config_path);
        ensure_out_dir(options.out_dir);

        Simulation sim(cfg);
        if (!options.quiet && scheme_uses_credits(cfg.scheme)) {
            const double i_min = sim.min_endowment_per_capita();
            if (cfg.market.endowment <= i_min)
                std::cerr << "warning: endowment " << cfg.market.endowment
                          << " does not exceed the minimum feasible endowment " << i_min
                          << "; the price dynamic cannot clear\n";
        }
        const RunResult result = sim.run_to_convergence();
        emit_run_outputs(cfg, result, sim, options.out_dir, started);

        if (!options.quiet) {
            std::cout << "scenario " << cfg.name << ": " << result.summary.days_run << " days, "
                      << (result.summary.converged ? "converged" : "not converged")
                      << ", welfare " << result.summary.metrics.at("social_welfare").mean
                      << " DKK/cap, price " << result.summary.metrics.at("credit_price").mean
                      << " DKK\n";
        }
        return result.summary.converged ? kExitOk : kExitNotConverged;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    } catch (const GridlockError& e) {
        std::cerr << e.what() << '\n';
        return kExitGridlock;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_optimize(const CliOptions& options) {
    try {
        const std::string started = iso8601_utc_now();
        const ScenarioConfig cfg = load_with_overrides(options, options.config_path);
        if (!cfg.optimize)
            throw ConfigError(options.config_path + ".optimize",
                              "missing required key for the optimize command");
        const OptimizeConfig& oc = *cfg.optimize;
        ensure_out_dir(options.out_dir);

        Bounds bounds{oc.bounds};
        std::ofstream trace(options.out_dir + "/trace.csv");
        if (!trace) throw std::runtime_error("cannot write trace.csv");
        write_trace_csv_header(trace, oc.parameters);

        auto objective = [&](const std::vector<double>& params) {
            ScenarioConfig trial = cfg;
            trial.optimize.reset();
            for (std::size_t i = 0; i < params.size(); ++i)
                set_toll_parameter(trial.toll, oc.parameters[i], params[i]);
            const RunResult run = run_to_convergence(trial);
            if (!run.summary.converged)
                throw std::runtime_error("candidate did not converge");
            return run.summary.metrics.at("social_welfare").mean;
        };
        const OptimizationResult best =
            optimize(objective, bounds, oc.n_init, oc.n_iter, oc.beta, cfg.seed, options.workers,
                     [&](const TraceRow& row) {
                         write_trace_csv_row(trace, row);
                         trace.flush();
                         if (!options.quiet)
                             std::cout << "eval " << row.iteration << ": objective "
                                       << row.objective << " (best " << row.best_so_far << ")\n";
                     });

        json out;
        out["schema_version"] = kOutputSchemaVersion;
        out["scenario"] = cfg.name;
        out["parameters"] = oc.parameters;
        out["best_params"] = best.best_params;
        out["best_objective"] = best.best_objective;
        out["evaluations"] = best.trace.size();
        std::ofstream bj(options.out_dir + "/best.json");
        bj << out.dump(2) << '\n';
        trace.close();
        bj.close();
        write_manifest(options.out_dir, cfg, {"trace.csv", "best.json"}, started,
                       iso8601_utc_now());
        if (!options.quiet)
            std::cout << "best objective " << best.best_objective << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_compare(const std::vector<std::string>& config_paths, const CliOptions& options) {
    try {
        if (config_paths.size() < 2)
            throw ConfigError("compare", "need at least two scenario configs");
        std::vector<ScenarioConfig> configs;
        for (const std::string& path : config_paths)
            configs.push_back(load_with_overrides(options, path));
        for (std::size_t i = 1; i < configs.size(); ++i)
            if (population_identity(configs[i]) != population_identity(configs[0]))
                throw ConfigError(config_paths[i],
                                  "population spec or seed differs from the first scenario");
        ensure_out_dir(options.out_dir);

        std::vector<RunResult> results(configs.size());
        std::vector<std::future<RunResult>> futures;
        std::size_t next = 0, done = 0;
        while (done < configs.size()) {
            while (next < configs.size() &&
                   futures.size() - done < static_cast<std::size_t>(std::max(1, options.workers))) {
                const ScenarioConfig& cfg = configs[next];
                futures.push_back(
                    std::async(std::launch::async, [&cfg] { return run_to_convergence(cfg); }));
                ++next;
            }
            results[done] = futures[done].get();
            ++done;
        }

        std::vector<std::string> names;
        for (const ScenarioConfig& cfg : configs) names.push_back(cfg.name);
        std::ofstream out(options.out_dir + "/comparison.csv");
        if (!out) throw std::runtime_error("cannot write comparison.csv");
        write_comparison_csv(out, names, results);
        if (!options.quiet) {
            for (std::size_t i = 0; i < names.size(); ++i)
                std::cout << names[i] << ": welfare "
                          << results[i].summary.metrics.at("social_welfare").mean << " DKK/cap\n";
        }
        for (const RunResult& r : results)
            if (!r.summary.converged) return kExitNotConverged;
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    } catch (const GridlockError& e) {
        std::cerr << e.what() << '\n';
        return kExitGridlock;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_sweep(const CliOptions& options, const std::vector<double>& endowments) {
    try {
        if (endowments.empty()) throw ConfigError("sweep", "need at least one endowment value");
        const ScenarioConfig cfg = load_with_overrides(options, options.config_path);
        if (!scheme_uses_credits(cfg.scheme))
            throw ConfigError(options.config_path + ".scheme",
                              "endowment sweep requires a TCS scheme");
        ensure_out_dir(options.out_dir);

        const std::vector<EndowmentPoint> points =
            sweep_endowment(cfg, endowments, std::max(1, options.workers));
        std::ofstream out(options.out_dir + "/endowment_sweep.csv");
        if (!out) throw std::runtime_error("cannot write endowment_sweep.csv");
        out << "endowment,equilibrium_price,converged\n";
        bool all_converged = true;
        for (const EndowmentPoint& p : points) {
            char line[96];
            std::snprintf(line, sizeof(line), "%.10g,%.10g,%d\n", p.endowment,
                          p.equilibrium_price, p.converged ? 1 : 0);
            out << line;
            all_converged = all_converged && p.converged;
            if (!options.quiet)
                std::cout << "I=" << p.endowment << " -> p*=" << p.equilibrium_price << '\n';
        }
        return all_converged ? kExitOk : kExitNotConverged;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    } catch (const GridlockError& e) {
        std::cerr << e.what() << '\n';
        return kExitGridlock;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

}  // namespace tcsim
