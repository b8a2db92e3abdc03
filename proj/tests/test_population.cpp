#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>

#include "tcsim/population.hpp"

using namespace tcsim;

namespace {

PopulationSpec table2_spec(int n, std::uint64_t seed) {
    PopulationSpec spec;
    spec.count = n;
    spec.seed = seed;
    return spec;  // defaults carry the production settings
}

}  // namespace

TEST_CASE("degenerate distributions produce identical travelers") {
    PopulationSpec spec = table2_spec(50, 7);
    spec.trip_length.stddev = 0.0;
    spec.departure.stddev = 0.0;
    spec.penalties.var_early = spec.penalties.var_late = spec.penalties.covariance = 0.0;
    const auto pop = generate_population(spec);
    REQUIRE(pop.size() == 50);
    for (const Traveler& t : pop) {
        CHECK(t.trip_length_m == 4600.0);
        CHECK(t.initial_departure_min == 80.0);
        CHECK(t.desired_arrival_min == doctest::Approx(80.0 + 4600.0 / 586.8).epsilon(1e-12));
        CHECK(t.early_penalty == 0.5);
        CHECK(t.late_penalty == 4.0);
    }
}

TEST_CASE("sampled attributes respect the truncation bounds") {
    const auto pop = generate_population(table2_spec(3700, 42));
    double sum_length = 0.0;
    for (const Traveler& t : pop) {
        CHECK(t.trip_length_m > 0.0);
        CHECK(t.initial_departure_min >= 20.0);
        CHECK(t.initial_departure_min <= 150.0);
        CHECK(t.early_penalty >= 0.3);
        CHECK(t.early_penalty <= 0.7);
        CHECK(t.late_penalty >= 2.5);
        CHECK(t.late_penalty <= 5.5);
        CHECK(t.desired_arrival_min ==
              doctest::Approx(t.initial_departure_min + t.trip_length_m / 586.8).epsilon(1e-12));
        sum_length += t.trip_length_m;
    }
    // Mean trip length within 3 standard errors of 4600 (sigma = 920).
    const double mean_length = sum_length / 3700.0;
    CHECK(std::abs(mean_length - 4600.0) < 3.0 * 920.0 / std::sqrt(3700.0));
}

TEST_CASE("penalty pair keeps its positive correlation") {
    const auto pop = generate_population(table2_spec(20000, 3));
    double me = 0.0, ml = 0.0;
    for (const Traveler& t : pop) {
        me += t.early_penalty;
        ml += t.late_penalty;
    }
    me /= pop.size();
    ml /= pop.size();
    double cov = 0.0, ve = 0.0, vl = 0.0;
    for (const Traveler& t : pop) {
        cov += (t.early_penalty - me) * (t.late_penalty - ml);
        ve += (t.early_penalty - me) * (t.early_penalty - me);
        vl += (t.late_penalty - ml) * (t.late_penalty - ml);
    }
    const double corr = cov / std::sqrt(ve * vl);
    CHECK(corr > 0.3);  // nominal correlation 0.01 / (0.05 * 0.4) = 0.5, minus truncation
    CHECK(corr < 0.7);
}

TEST_CASE("generation is deterministic and byte-stable") {
    const auto a = generate_population(table2_spec(1, 99));
    const auto b = generate_population(table2_spec(1, 99));
    REQUIRE(a.size() == 1);
    CHECK(a[0].trip_length_m == b[0].trip_length_m);
    CHECK(a[0].initial_departure_min == b[0].initial_departure_min);
    CHECK(a[0].early_penalty == b[0].early_penalty);
    CHECK(a[0].late_penalty == b[0].late_penalty);

    const auto big_a = generate_population(table2_spec(500, 11));
    const auto big_b = generate_population(table2_spec(500, 11));
    std::ostringstream sa, sb;
    write_population_records(sa, big_a);
    write_population_records(sb, big_b);
    CHECK(sa.str() == sb.str());
    CHECK(population_fingerprint(big_a) == population_fingerprint(big_b));

    const auto other_seed = generate_population(table2_spec(500, 12));
    CHECK(population_fingerprint(big_a) != population_fingerprint(other_seed));
}

TEST_CASE("departure window is centered with 2*tau+1 members") {
    PopulationSpec spec = table2_spec(3, 5);
    spec.window_half_steps = 30;
    spec.step_minutes = 3.0;
    const auto pop = generate_population(spec);
    CHECK(spec.alternatives() == 61);
    for (const Traveler& t : pop) {
        CHECK(window_time(t, spec, 0) ==
              doctest::Approx(t.initial_departure_min - 90.0).epsilon(1e-12));
        CHECK(window_time(t, spec, 30) == t.initial_departure_min);
        CHECK(window_time(t, spec, 60) ==
              doctest::Approx(t.initial_departure_min + 90.0).epsilon(1e-12));
        for (int a = 1; a < spec.alternatives(); ++a)
            CHECK(window_time(t, spec, a) - window_time(t, spec, a - 1) ==
                  doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("impossible truncation bounds hit the rejection cap") {
    PopulationSpec spec = table2_spec(1, 1);
    spec.departure.mean = 0.0;
    spec.departure.stddev = 0.0;  // all mass at 0, outside [20, 150]
    CHECK_THROWS_AS(generate_population(spec), std::runtime_error);
}

TEST_CASE("invalid specs are rejected up front") {
    PopulationSpec spec = table2_spec(0, 1);
    CHECK_THROWS_AS(generate_population(spec), std::invalid_argument);
    spec = table2_spec(5, 1);
    spec.trip_length.stddev = -1.0;
    CHECK_THROWS_AS(generate_population(spec), std::invalid_argument);
    spec = table2_spec(5, 1);
    spec.penalties.covariance = 1.0;  // exceeds sqrt(var_e * var_l)
    CHECK_THROWS_AS(generate_population(spec), std::invalid_argument);
}
