#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace tcsim {

// Network-wide speed as a function of accumulation: V(n) = v_f (1 - n/n_jam)^2.
struct SpeedFunction {
    double free_flow_m_min = 586.8;
    double jam_accumulation = 4500.0;

    double operator()(double n) const;
};

double eval_speed(const SpeedFunction& speed, double accumulation);

struct GridlockError : std::runtime_error {
    explicit GridlockError(double when);
    double time_min;
};

enum class EventKind { departure, arrival };

struct TrajectoryEvent {
    double time_min;
    EventKind kind;
    int traveler;
    int accumulation_after;
};

// Outcome of one simulated day. The cumulative-distance curve D(t) is stored
// as breakpoints at event times; between breakpoints the slope is the constant
// network speed, and outside the event horizon the network is empty so the
// slope is free-flow.
struct DayTrajectory {
    std::vector<TrajectoryEvent> events;
    std::vector<double> knot_time;      // strictly increasing
    std::vector<double> knot_distance;  // strictly increasing, same length
    std::vector<double> departure_time;
    std::vector<double> arrival_time;
    std::vector<double> travel_time;
    int peak_accumulation = 0;
    double free_flow_m_min = 0.0;

    double distance_at(double t) const;
    double invert_distance(double target) const;
};

// Event-based trip length dynamics: every traveler's remaining distance
// shrinks at the shared speed V(n(t)); a trip completes when the distance
// traveled since entry equals the trip length. Simultaneous events resolve
// arrivals first, then by traveler id. Throws GridlockError when accumulation
// reaches jam capacity.
DayTrajectory simulate_day(std::span<const double> departures, std::span<const double> lengths,
                           const SpeedFunction& speed);

// Travel time a zero-footprint traveler would experience entering at `depart`
// with the given trip length, from inverting the stored D(t).
double fictional_travel_time(const DayTrajectory& trajectory, double depart, double length);

// CSV exports: (time, accumulation) breakpoints and per-traveler outcomes.
void write_accumulation_csv(std::ostream& out, const DayTrajectory& trajectory);
void write_trips_csv(std::ostream& out, const DayTrajectory& trajectory);

}  // namespace tcsim
