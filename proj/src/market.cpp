#include "tcsim/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcsim {

namespace {

struct EvalVisitor {
    double t;

    double operator()(const GaussianToll& g) const {
        const double z = t - g.center;
        return g.amplitude * std::exp(-z * z / (2.0 * g.width * g.width));
    }
    double operator()(const StepToll& s) const {
        const int band = static_cast<int>(std::floor(std::abs(t - s.center) / s.band_width));
        if (band >= static_cast<int>(s.levels.size())) return 0.0;
        return s.levels[static_cast<std::size_t>(band)];
    }
    double operator()(const TriangularToll& tri) const {
        return tri.height * std::max(0.0, 1.0 - 2.0 * std::abs(t - tri.center) / tri.base);
    }
};

}  // namespace

double TollProfile::operator()(double t) const { return std::visit(EvalVisitor{t}, shape); }

double eval_toll(const TollProfile& profile, double t) { return profile(t); }

double trip_consumption(const TollProfile& profile, double depart, double trip_length_m,
                        double travel_time_min) {
    const double base =
        profile.basis == TollBasis::per_distance ? trip_length_m : travel_time_min;
    return profile(depart) * base * profile.unit_scale;
}

Transactions settle_day(std::span<const double> departures, std::span<const double> travel_times,
                        std::span<const double> lengths, const TollProfile& profile,
                        double endowment) {
    const std::size_t n = departures.size();
    if (travel_times.size() != n || lengths.size() != n)
        throw std::invalid_argument("settle_day: input size mismatch");

    Transactions tx;
    tx.per_traveler.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        TravelerTransaction& t = tx.per_traveler[i];
        t.consumed = trip_consumption(profile, departures[i], lengths[i], travel_times[i]);
        t.from_endowment = std::min(endowment, t.consumed);
        t.bought = t.consumed - t.from_endowment;
        t.sold = std::max(0.0, endowment - t.consumed);
        tx.total_consumed += t.consumed;
        tx.total_bought += t.bought;
        tx.total_sold += t.sold;
        tx.total_from_endowment += t.from_endowment;
    }
    tx.excess = tx.total_consumed - endowment * static_cast<double>(n);
    return tx;
}

double update_price(double price, double excess, double adjustment_rate) {
    if (price < 0.0) throw std::invalid_argument("update_price: price must be nonnegative");
    const double step = adjustment_rate * excess;
    if (price > 0.0) return std::max(0.0, price + step);
    return std::max(0.0, step);
}

double min_endowment(const std::vector<Traveler>& population, const PopulationSpec& spec,
                     const TollProfile& profile) {
    if (population.empty()) return 0.0;
    double total = 0.0;
    for (const Traveler& t : population) {
        double cheapest = std::numeric_limits<double>::infinity();
        for (int a = 0; a < spec.alternatives(); ++a) {
            const double depart = window_time(t, spec, a);
            const double free_flow_tt = t.trip_length_m / spec.free_flow_speed_m_min;
            cheapest = std::min(cheapest,
                                trip_consumption(profile, depart, t.trip_length_m, free_flow_tt));
        }
        total += cheapest;
    }
    return total / static_cast<double>(population.size());
}

}  // namespace tcsim
