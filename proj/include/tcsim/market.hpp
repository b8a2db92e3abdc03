#pragma once

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "tcsim/population.hpp"

namespace tcsim {

// Time-of-day tariff shapes. All are nonnegative and symmetric about their
// center parameter.
struct GaussianToll {
    double amplitude = 0.0;  // value at the center
    double center = 0.0;     // minutes
    double width = 1.0;      // gaussian sigma, minutes
};

struct StepToll {
    std::array<double, 5> levels{};  // levels[0] innermost plateau, levels[4] outermost
    double center = 0.0;
    double band_width = 15.0;  // each outer plateau spans one band per side;
                               // the innermost spans one band on both sides
};

struct TriangularToll {
    double height = 0.0;
    double base = 1.0;  // total support length, minutes
    double center = 0.0;
};

enum class TollBasis { per_distance, per_travel_time };

// Tariff as a function of clock time plus the unit basis it multiplies:
// consumption = Toll(t) * L * w (per-distance) or Toll(t) * T * w'
// (per-travel-time). Denomination (credits vs money) is decided by the scheme
// using the profile, not stored here.
struct TollProfile {
    std::variant<GaussianToll, StepToll, TriangularToll> shape = GaussianToll{};
    TollBasis basis = TollBasis::per_distance;
    double unit_scale = 2e-4;  // w or w'

    double operator()(double t) const;
};

double eval_toll(const TollProfile& profile, double t);

// Credits (or money) consumed by one trip.
double trip_consumption(const TollProfile& profile, double depart, double trip_length_m,
                        double travel_time_min);

struct MarketState {
    double price = 0.0;            // DKK per credit
    double endowment = 5.0;        // credits per traveler per day
    double adjustment_rate = 2e-4; // DKK per excess credit
};

struct TravelerTransaction {
    double consumed = 0.0;
    double from_endowment = 0.0;
    double bought = 0.0;
    double sold = 0.0;
};

struct Transactions {
    std::vector<TravelerTransaction> per_traveler;
    double total_consumed = 0.0;
    double total_bought = 0.0;
    double total_sold = 0.0;
    double total_from_endowment = 0.0;
    double excess = 0.0;  // total consumed - endowment * N
};

// End-of-day regulator-only trades: each traveler pays the tariff from the
// endowment first, buys any shortfall and sells any surplus, ending with a
// zero credit balance.
Transactions settle_day(std::span<const double> departures, std::span<const double> travel_times,
                        std::span<const double> lengths, const TollProfile& profile,
                        double endowment);

// One step of the price dynamic p' = p + Q(p, Z) with Q(p,Z) = kZ for p > 0
// and max(0, kZ) for p = 0, clamped so the price never goes negative.
double update_price(double price, double excess, double adjustment_rate);

// Per-capita credit demand when the price dominates all other costs: every
// traveler at the cheapest slot of their departure window. For per-travel-time
// profiles the free-flow travel time is used as an approximation.
double min_endowment(const std::vector<Traveler>& population, const PopulationSpec& spec,
                     const TollProfile& profile);

}  // namespace tcsim
