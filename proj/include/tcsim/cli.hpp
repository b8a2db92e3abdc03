#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcsim {

// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitGridlock = 3;
inline constexpr int kExitNotConverged = 4;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> days;
    bool quiet = false;
    int workers = 1;
};

int cmd_simulate(const CliOptions& options);
int cmd_optimize(const CliOptions& options);
int cmd_compare(const std::vector<std::string>& config_paths, const CliOptions& options);
int cmd_sweep(const CliOptions& options, const std::vector<double>& endowments);

int default_worker_count();

}  // namespace tcsim
