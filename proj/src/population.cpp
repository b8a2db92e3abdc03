#include "tcsim/population.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tcsim/rng.hpp"

namespace tcsim {

namespace {

constexpr int kRejectionCap = 10000;

double draw_truncated(SplitMix64& rng, const TruncatedNormalSpec& spec, const char* what) {
    for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
        const double x = spec.mean + spec.stddev * rng.next_normal();
        if (x >= spec.lower && x <= spec.upper) return x;
    }
    throw std::runtime_error(std::string("population: rejection cap exceeded for ") + what +
                             " (bounds likely exclude nearly all mass)");
}

void validate(const PopulationSpec& spec) {
    if (spec.count <= 0) throw std::invalid_argument("population: count must be positive");
    if (spec.trip_length.stddev < 0.0 || spec.departure.stddev < 0.0)
        throw std::invalid_argument("population: stddev must be nonnegative");
    if (spec.trip_length.lower >= spec.trip_length.upper ||
        spec.departure.lower >= spec.departure.upper)
        throw std::invalid_argument("population: truncation bounds must satisfy lower < upper");
    if (spec.window_half_steps < 0 || spec.step_minutes <= 0.0)
        throw std::invalid_argument("population: invalid departure window");
    if (spec.free_flow_speed_m_min <= 0.0)
        throw std::invalid_argument("population: free-flow speed must be positive");
    const PenaltySpec& p = spec.penalties;
    if (p.var_early < 0.0 || p.var_late < 0.0 ||
        p.var_early * p.var_late < p.covariance * p.covariance)
        throw std::invalid_argument("population: penalty covariance not positive semidefinite");
}

}  // namespace

std::vector<Traveler> generate_population(const PopulationSpec& spec) {
    validate(spec);
    const PenaltySpec& pen = spec.penalties;

    // Cholesky factor of the 2x2 penalty covariance.
    const double l11 = std::sqrt(pen.var_early);
    const double l21 = l11 > 0.0 ? pen.covariance / l11 : 0.0;
    const double l22 = std::sqrt(std::max(0.0, pen.var_late - l21 * l21));

    std::vector<Traveler> population;
    population.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        SplitMix64 rng(substream_seed(spec.seed, Stream::population, static_cast<std::uint64_t>(i)));
        Traveler t;
        t.id = i;
        t.trip_length_m = draw_truncated(rng, spec.trip_length, "trip length");
        t.initial_departure_min = draw_truncated(rng, spec.departure, "initial departure");
        t.desired_arrival_min =
            t.initial_departure_min + t.trip_length_m / spec.free_flow_speed_m_min;

        bool accepted = false;
        for (int attempt = 0; attempt < kRejectionCap && !accepted; ++attempt) {
            const double z1 = rng.next_normal();
            const double z2 = rng.next_normal();
            const double early = pen.mean_early + l11 * z1;
            const double late = pen.mean_late + l21 * z1 + l22 * z2;
            if (early >= pen.early_lower && early <= pen.early_upper && late >= pen.late_lower &&
                late <= pen.late_upper) {
                t.early_penalty = early;
                t.late_penalty = late;
                accepted = true;
            }
        }
        if (!accepted)
            throw std::runtime_error(
                "population: rejection cap exceeded for schedule penalties "
                "(bounds likely exclude nearly all mass)");

        t.value_of_time = spec.value_of_time;
        population.push_back(t);
    }
    return population;
}

double window_time(const Traveler& t, const PopulationSpec& spec, int alternative) {
    return t.initial_departure_min +
           (alternative - spec.window_half_steps) * spec.step_minutes;
}

void write_population_records(std::ostream& out, const std::vector<Traveler>& population) {
    char line[256];
    for (const Traveler& t : population) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.id,
                      t.trip_length_m, t.initial_departure_min, t.desired_arrival_min,
                      t.early_penalty, t.late_penalty);
        out << line;
    }
}

std::string population_fingerprint(const std::vector<Traveler>& population) {
    std::ostringstream os;
    write_population_records(os, population);
    // FNV-1a over the serialized records.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tcsim
