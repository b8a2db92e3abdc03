#include "tcsim/mfd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

namespace tcsim {

namespace {
// Remaining distances below this are treated as completed trips.
constexpr double kResidualEpsilonM = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double SpeedFunction::operator()(double n) const {
    const double x = 1.0 - n / jam_accumulation;
    return free_flow_m_min * x * x;
}

double eval_speed(const SpeedFunction& speed, double accumulation) {
    if (!(accumulation >= 0.0) || accumulation > speed.jam_accumulation)
        throw std::out_of_range("eval_speed: accumulation outside [0, n_jam]");
    return speed(accumulation);
}

GridlockError::GridlockError(double when)
    : std::runtime_error("gridlock: accumulation reached jam capacity at t=" +
                         std::to_string(when) + " min"),
      time_min(when) {}

DayTrajectory simulate_day(std::span<const double> departures, std::span<const double> lengths,
                           const SpeedFunction& speed) {
    const std::size_t n_travelers = departures.size();
    if (lengths.size() != n_travelers)
        throw std::invalid_argument("simulate_day: departures/lengths size mismatch");
    for (std::size_t i = 0; i < n_travelers; ++i) {
        if (!std::isfinite(departures[i]))
            throw std::invalid_argument("simulate_day: non-finite departure time");
        if (!(lengths[i] > 0.0)) throw std::invalid_argument("simulate_day: trip length must be > 0");
    }

    DayTrajectory out;
    out.free_flow_m_min = speed.free_flow_m_min;
    out.departure_time.assign(departures.begin(), departures.end());
    out.arrival_time.assign(n_travelers, kInf);
    out.travel_time.assign(n_travelers, kInf);
    out.events.reserve(2 * n_travelers);
    out.knot_time.reserve(2 * n_travelers);
    out.knot_distance.reserve(2 * n_travelers);
    if (n_travelers == 0) return out;

    std::vector<int> dep_order(n_travelers);
    std::iota(dep_order.begin(), dep_order.end(), 0);
    std::sort(dep_order.begin(), dep_order.end(), [&](int a, int b) {
        if (departures[a] != departures[b]) return departures[a] < departures[b];
        return a < b;
    });

    // In-network travelers keyed by the cumulative distance at which their
    // trip completes; ordering by that threshold never changes because all of
    // them advance at the same speed.
    using HeapEntry = std::pair<double, int>;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> in_network;

    double now = departures[dep_order[0]];
    double distance = 0.0;
    int accumulation = 0;
    std::size_t next_dep = 0;

    auto push_knot = [&](double t, double d) {
        if (!out.knot_time.empty() && t == out.knot_time.back()) return;
        out.knot_time.push_back(t);
        out.knot_distance.push_back(d);
    };

    while (next_dep < n_travelers || !in_network.empty()) {
        const double v = speed(accumulation);
        double arrival_at = kInf;
        if (!in_network.empty()) {
            double remaining = in_network.top().first - distance;
            if (remaining < kResidualEpsilonM) remaining = 0.0;
            arrival_at = now + remaining / v;
        }
        const double depart_at = next_dep < n_travelers ? departures[dep_order[next_dep]] : kInf;

        const bool is_arrival = arrival_at <= depart_at;  // arrivals win ties
        const double event_time = is_arrival ? arrival_at : depart_at;
        distance += v * (event_time - now);
        now = event_time;

        int id;
        if (is_arrival) {
            id = in_network.top().second;
            in_network.pop();
            --accumulation;
            out.arrival_time[id] = now;
            out.travel_time[id] = now - departures[id];
            out.events.push_back({now, EventKind::arrival, id, accumulation});
        } else {
            id = dep_order[next_dep++];
            ++accumulation;
            if (accumulation >= speed.jam_accumulation) throw GridlockError(now);
            in_network.emplace(distance + lengths[id], id);
            out.events.push_back({now, EventKind::departure, id, accumulation});
        }
        push_knot(now, distance);
        out.peak_accumulation = std::max(out.peak_accumulation, accumulation);
    }
    return out;
}

double DayTrajectory::distance_at(double t) const {
    if (knot_time.empty()) return free_flow_m_min * t;
    if (t <= knot_time.front())
        return knot_distance.front() - free_flow_m_min * (knot_time.front() - t);
    if (t >= knot_time.back())
        return knot_distance.back() + free_flow_m_min * (t - knot_time.back());
    const auto it = std::upper_bound(knot_time.begin(), knot_time.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - knot_time.begin()) - 1;
    const double slope =
        (knot_distance[k + 1] - knot_distance[k]) / (knot_time[k + 1] - knot_time[k]);
    return knot_distance[k] + slope * (t - knot_time[k]);
}

double DayTrajectory::invert_distance(double target) const {
    if (knot_time.empty()) return target / free_flow_m_min;
    if (target <= knot_distance.front())
        return knot_time.front() - (knot_distance.front() - target) / free_flow_m_min;
    if (target >= knot_distance.back())
        return knot_time.back() + (target - knot_distance.back()) / free_flow_m_min;
    const auto it = std::upper_bound(knot_distance.begin(), knot_distance.end(), target);
    const std::size_t k = static_cast<std::size_t>(it - knot_distance.begin()) - 1;
    const double slope =
        (knot_distance[k + 1] - knot_distance[k]) / (knot_time[k + 1] - knot_time[k]);
    return knot_time[k] + (target - knot_distance[k]) / slope;
}

double fictional_travel_time(const DayTrajectory& trajectory, double depart, double length) {
    if (!(length > 0.0))
        throw std::invalid_argument("fictional_travel_time: trip length must be > 0");
    const double start = trajectory.distance_at(depart);
    return trajectory.invert_distance(start + length) - depart;
}

void write_accumulation_csv(std::ostream& out, const DayTrajectory& trajectory) {
    out << "time_min,accumulation\n";
    char line[64];
    for (const TrajectoryEvent& e : trajectory.events) {
        std::snprintf(line, sizeof(line), "%.10g,%d\n", e.time_min, e.accumulation_after);
        out << line;
    }
}

void write_trips_csv(std::ostream& out, const DayTrajectory& trajectory) {
    out << "traveler,depart_min,arrive_min,travel_time_min\n";
    char line[128];
    for (std::size_t i = 0; i < trajectory.departure_time.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g\n", i,
                      trajectory.departure_time[i], trajectory.arrival_time[i],
                      trajectory.travel_time[i]);
        out << line;
    }
}

}  // namespace tcsim
