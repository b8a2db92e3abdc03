#include "tcsim/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcsim {

CostBreakdown generalized_cost(const Traveler& traveler, double depart, double travel_time,
                               double price, const TollProfile& toll, Scheme scheme) {
    if (!(travel_time >= 0.0))
        throw std::invalid_argument("generalized_cost: travel time must be nonnegative");
    if (price < 0.0) throw std::invalid_argument("generalized_cost: price must be nonnegative");

    CostBreakdown cost;
    const double arrival = depart + travel_time;
    const bool early = arrival < traveler.desired_arrival_min;
    const double delay = early
                             ? traveler.early_penalty * (traveler.desired_arrival_min - arrival)
                             : traveler.late_penalty * (arrival - traveler.desired_arrival_min);
    cost.time_equivalent = travel_time + delay;
    cost.travel_time_cost = traveler.value_of_time * travel_time;
    cost.schedule_delay_cost = traveler.value_of_time * delay;

    switch (scheme) {
        case Scheme::none:
            cost.toll_payment = 0.0;
            break;
        case Scheme::tcs_distance:
        case Scheme::tcs_time:
            cost.toll_payment =
                price * trip_consumption(toll, depart, traveler.trip_length_m, travel_time);
            break;
        case Scheme::congestion_pricing:
            cost.toll_payment =
                trip_consumption(toll, depart, traveler.trip_length_m, travel_time);
            break;
    }
    cost.total = -traveler.value_of_time * cost.time_equivalent - cost.toll_payment;
    return cost;
}

std::vector<double> choice_probabilities(std::span<const double> perceived, double logit_scale) {
    if (!(logit_scale > 0.0))
        throw std::invalid_argument("choice_probabilities: logit scale must be positive");
    if (perceived.empty())
        throw std::invalid_argument("choice_probabilities: empty alternative set");

    const double top = *std::max_element(perceived.begin(), perceived.end());
    std::vector<double> prob(perceived.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < perceived.size(); ++i) {
        prob[i] = std::exp(logit_scale * (perceived[i] - top));
        sum += prob[i];
    }
    for (double& p : prob) p /= sum;
    return prob;
}

ChoiceDraw sample_choice(std::span<const double> perceived, double logit_scale, SplitMix64& rng) {
    if (!(logit_scale > 0.0))
        throw std::invalid_argument("sample_choice: logit scale must be positive");
    if (perceived.empty()) throw std::invalid_argument("sample_choice: empty alternative set");

    const double scale = 1.0 / logit_scale;
    ChoiceDraw best;
    double best_utility = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < perceived.size(); ++i) {
        const double eps = rng.next_gumbel(scale);
        const double utility = perceived[i] + eps;
        if (utility > best_utility) {
            best_utility = utility;
            best.index = static_cast<int>(i);
            best.epsilon = eps;
        }
    }
    return best;
}

void learning_update(std::span<double> perceived, std::span<const double> experienced,
                     double learning_weight) {
    if (perceived.size() != experienced.size())
        throw std::invalid_argument("learning_update: misaligned windows");
    if (!(learning_weight > 0.0) || !(learning_weight < 1.0))
        throw std::invalid_argument("learning_update: weight must lie in (0, 1)");
    for (std::size_t i = 0; i < perceived.size(); ++i)
        perceived[i] = learning_weight * perceived[i] + (1.0 - learning_weight) * experienced[i];
}

}  // namespace tcsim
