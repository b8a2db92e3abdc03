#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tcsim {

// One commuter. Attributes are fixed for the whole day-to-day process; only
// the perceived-cost vector (owned by the simulation) evolves.
struct Traveler {
    int id = 0;
    double trip_length_m = 0.0;
    double initial_departure_min = 0.0;  // window center, also the day-0 departure
    double desired_arrival_min = 0.0;    // initial departure + free-flow travel time
    double early_penalty = 0.0;          // multiplier on minutes of early arrival
    double late_penalty = 0.0;           // multiplier on minutes of late arrival
    double value_of_time = 0.0;          // DKK per minute
};

struct TruncatedNormalSpec {
    double mean = 0.0;
    double stddev = 0.0;
    double lower = -1e300;
    double upper = 1e300;
};

// Early/late penalties are drawn jointly, then rejection-truncated per
// component.
struct PenaltySpec {
    double mean_early = 0.5;
    double mean_late = 4.0;
    double var_early = 0.0025;   // 0.05^2
    double var_late = 0.16;      // 0.4^2
    double covariance = 0.01;    // 0.1^2
    double early_lower = 0.3, early_upper = 0.7;
    double late_lower = 2.5, late_upper = 5.5;
};

struct PopulationSpec {
    int count = 0;
    TruncatedNormalSpec trip_length{4600.0, 920.0, 0.0, 1e300};
    TruncatedNormalSpec departure{80.0, 18.0, 20.0, 150.0};
    PenaltySpec penalties{};
    double value_of_time = 1.1;          // DKK/min
    int window_half_steps = 30;          // tau
    double step_minutes = 3.0;           // delta t
    double free_flow_speed_m_min = 586.8;
    std::uint64_t seed = 0;

    int alternatives() const { return 2 * window_half_steps + 1; }
};

// Deterministic for a fixed (spec, seed). Throws std::invalid_argument on a
// degenerate spec and std::runtime_error when rejection sampling exceeds the
// retry cap.
std::vector<Traveler> generate_population(const PopulationSpec& spec);

// Departure-time alternative `a` (0-based) of traveler `t0` under the spec's
// window: t0 + (a - tau) * dt.
double window_time(const Traveler& t, const PopulationSpec& spec, int alternative);

// Line-delimited audit export: id, trip length, initial departure, desired
// arrival, early penalty, late penalty. Byte-stable for a fixed population.
void write_population_records(std::ostream& out, const std::vector<Traveler>& population);
std::string population_fingerprint(const std::vector<Traveler>& population);

}  // namespace tcsim
