#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcsim/behavior.hpp"
#include "tcsim/market.hpp"
#include "tcsim/mfd.hpp"
#include "tcsim/population.hpp"

namespace tcsim {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error("config error at '" + path + "': " + message), field_path(path) {}
    std::string field_path;
};

struct ConvergenceConfig {
    double gap_threshold_pct = 0.5;
    int consecutive_days = 5;
    int tail_days = 10;  // averaging window for equilibrium statistics
};

// Bounds and budget for toll-profile optimization. `parameters` name the
// tunable fields of the configured shape.
struct OptimizeConfig {
    std::vector<std::string> parameters;
    std::vector<std::pair<double, double>> bounds;
    int n_init = 30;
    int n_iter = 40;
    double beta = 2.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    int days = 150;
    PopulationSpec population{};
    SpeedFunction speed{};
    Scheme scheme = Scheme::none;
    TollProfile toll{};
    MarketState market{};
    double learning_weight = 0.7;   // omega
    double logit_scale = 0.15;      // mu, DKK^-1
    ConvergenceConfig convergence{};
    std::vector<int> record_days{0};  // -1 means the final simulated day
    std::optional<std::string> warm_start;
    std::optional<OptimizeConfig> optimize;
};

// Parse + validate. Unknown scheme/shape names, missing keys and ill-typed
// values raise ConfigError with the offending field path.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin = "<inline>");

// Canonical JSON rendering (sorted keys) and its hash; stable under key
// reordering in the source file.
std::string scenario_to_json(const ScenarioConfig& config);
std::string config_hash(const ScenarioConfig& config);

// Population + seed identity, used to refuse cross-population comparisons.
std::string population_identity(const ScenarioConfig& config);

const char* scheme_name(Scheme scheme);
bool scheme_uses_credits(Scheme scheme);

// Applies a named toll parameter (e.g. "amplitude", "center", "width",
// "height", "base", "level0".."level4") to the profile in place.
void set_toll_parameter(TollProfile& toll, const std::string& name, double value);

}  // namespace tcsim
