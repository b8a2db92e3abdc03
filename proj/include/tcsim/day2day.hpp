#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tcsim/behavior.hpp"
#include "tcsim/market.hpp"
#include "tcsim/mfd.hpp"
#include "tcsim/scenario.hpp"

namespace tcsim {

// Per-capita welfare components (DKK). Under TCS, consumer surplus includes
// the credit payment; the transfer terms give it back, so the total always
// reduces to mean(-theta * tc + epsilon). Both routes are kept and compared.
struct WelfareComponents {
    double consumer_surplus = 0.0;
    double traveler_revenue = 0.0;   // TR: credits sold * price
    double regulator_revenue = 0.0;  // RR: credits bought * price (money toll under CP)
    double regulator_cost = 0.0;     // RC: equals TR under TCS
    double endowment_value = 0.0;    // TE: endowment spent * price
    double total = 0.0;              // scheme identity: CS+TR+RR-RC+TE / CS+RR / CS
    double direct_total = 0.0;       // mean(-theta * tc + epsilon)
};

WelfareComponents compute_welfare(std::span<const CostBreakdown> chosen_costs,
                                  std::span<const double> epsilon, const Transactions* transactions,
                                  double price, Scheme scheme);

// Per-traveler state of one day, kept only for requested record days (and the
// final day).
struct DayDetail {
    std::vector<double> chosen_departure;
    std::vector<double> travel_time;
    std::vector<double> epsilon;
    std::vector<CostBreakdown> chosen_cost;
    std::vector<double> experienced_costs;  // N x alternatives, the c_d matrix
    DayTrajectory trajectory;
    Transactions transactions;
};

struct DayRecord {
    int day = 0;
    double price = 0.0;          // price in effect during the day
    double excess = 0.0;         // Z_d, credits
    double inconsistency = 0.0;  // ||C_d - c_d||_1 / N, NaN on a cold day 0
    double gap_pct = 0.0;        // ||C_d - c_d||_1 / ||C_d||_1 * 100
    WelfareComponents welfare;
    double mean_travel_time = 0.0;
    double travel_time_cost = 0.0;     // per-capita theta*T, positive
    double schedule_delay_cost = 0.0;  // per-capita, positive
    double toll_payment = 0.0;         // per-capita DKK
    double random_utility = 0.0;       // mean realized epsilon
    double consumed = 0.0;             // per-capita credits
    double bought = 0.0;
    double sold = 0.0;
    double from_endowment = 0.0;
    int peak_accumulation = 0;
    double welfare_identity_gap = 0.0;
    std::shared_ptr<const DayDetail> detail;
};

struct EquilibriumStat {
    double mean = 0.0;
    double stddev = 0.0;
};

struct RunSummary {
    std::map<std::string, EquilibriumStat> metrics;
    bool converged = false;
    int converged_day = -1;
    int days_run = 0;
    int tail_days = 0;
    bool feasibility_warning = false;
    double min_endowment_value = 0.0;
};

struct RunResult {
    std::vector<DayRecord> records;
    RunSummary summary;
};

// Holds the day-to-day state: population, perceived costs, credit price and
// the day counter. One instance drives one scenario run; the class itself is
// a pure function of (config, seed), so distinct instances may run on
// distinct threads.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config);

    // One daily cycle: choose -> simulate -> settle -> learn -> reprice.
    // On a cold day 0 travelers use their predetermined departure time.
    DayRecord run_day(bool want_detail = false);

    // Runs until the gap stays under the configured threshold for the
    // configured number of consecutive days, or the horizon is exhausted.
    RunResult run_to_convergence();

    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<Traveler>& population() const { return population_; }
    const std::vector<double>& perception() const { return perception_; }
    bool has_perception() const { return has_perception_; }
    int day() const { return day_; }
    double price() const { return price_; }
    double min_endowment_per_capita() const;

    void save_snapshot(const std::string& path) const;
    void load_snapshot(const std::string& path);

private:
    ScenarioConfig cfg_;
    std::vector<Traveler> population_;
    std::vector<double> window_;      // N x alternatives departure minutes
    std::vector<double> lengths_;
    std::vector<double> perception_;  // N x alternatives, C_d
    bool has_perception_ = false;
    double price_ = 0.0;
    int day_ = 0;

    // scratch buffers reused across days
    std::vector<double> departures_;
    std::vector<int> chosen_;
    std::vector<double> epsilon_;
    std::vector<double> experienced_;  // N x alternatives, c_d
    std::vector<CostBreakdown> chosen_cost_;
};

RunResult run_to_convergence(const ScenarioConfig& config);

struct EndowmentPoint {
    double endowment = 0.0;
    double equilibrium_price = 0.0;
    bool converged = false;
};

// Re-runs the scenario for each endowment value; runs fan out across up to
// `workers` threads.
std::vector<EndowmentPoint> sweep_endowment(const ScenarioConfig& config,
                                            const std::vector<double>& endowments,
                                            int workers = 1);

}  // namespace tcsim
