#pragma once

#include <span>
#include <vector>

#include "tcsim/market.hpp"
#include "tcsim/population.hpp"
#include "tcsim/rng.hpp"

namespace tcsim {

enum class Scheme { none, tcs_distance, tcs_time, congestion_pricing };

// Money-metric disutility of one trip alternative. `total` is negative; the
// component costs are stored unsigned.
struct CostBreakdown {
    double travel_time_cost = 0.0;    // theta * T
    double schedule_delay_cost = 0.0; // theta * (SDE/SDL term)
    double toll_payment = 0.0;        // DKK
    double time_equivalent = 0.0;     // tc: minutes incl. weighted schedule delay
    double total = 0.0;               // -theta*tc - toll_payment
};

// Cost of departing at `depart` with the given realized/estimated travel time.
// The toll term depends on the scheme: credits * price under TCS (distance or
// travel-time basis), money directly under congestion pricing, absent
// otherwise.
CostBreakdown generalized_cost(const Traveler& traveler, double depart, double travel_time,
                               double price, const TollProfile& toll, Scheme scheme);

// Logit probabilities over a perceived-cost vector (overflow-safe).
std::vector<double> choice_probabilities(std::span<const double> perceived, double logit_scale);

struct ChoiceDraw {
    int index = 0;
    double epsilon = 0.0;  // realized random utility of the chosen alternative
};

// Random-utility draw: independent Gumbel(0, 1/mu) noise per alternative,
// argmax of perceived + noise. Distributionally identical to sampling from
// choice_probabilities, but keeps the realized epsilon for welfare.
ChoiceDraw sample_choice(std::span<const double> perceived, double logit_scale, SplitMix64& rng);

// Exponential smoothing of perception toward today's experienced costs:
// C' = omega * C + (1 - omega) * c, elementwise.
void learning_update(std::span<double> perceived, std::span<const double> experienced,
                     double learning_weight);

}  // namespace tcsim
