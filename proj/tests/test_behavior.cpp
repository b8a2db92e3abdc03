#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tcsim/behavior.hpp"

using namespace tcsim;

namespace {

Traveler make_traveler(double desired_arrival) {
    Traveler t;
    t.id = 0;
    t.trip_length_m = 4600.0;
    t.initial_departure_min = desired_arrival - 10.0;
    t.desired_arrival_min = desired_arrival;
    t.early_penalty = 0.5;
    t.late_penalty = 4.0;
    t.value_of_time = 1.1;
    return t;
}

TollProfile gaussian_toll(double amplitude, double center, double width, double scale = 2e-4) {
    TollProfile toll;
    toll.shape = GaussianToll{amplitude, center, width};
    toll.basis = TollBasis::per_distance;
    toll.unit_scale = scale;
    return toll;
}

}  // namespace

TEST_CASE("generalized cost: on-time arrival is pure travel time") {
    const Traveler t = make_traveler(90.0);
    const CostBreakdown c =
        generalized_cost(t, 80.0, 10.0, 0.0, TollProfile{}, Scheme::none);
    CHECK(c.total == doctest::Approx(-11.0).epsilon(1e-12));
    CHECK(c.schedule_delay_cost == 0.0);
    CHECK(c.toll_payment == 0.0);
    CHECK(c.time_equivalent == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("generalized cost: early and late arrivals use one penalty each") {
    const Traveler t = make_traveler(95.0);
    // depart 80, travel 10 -> arrive 90, 5 min early: -1.1*(10 + 0.5*5) = -13.75
    const CostBreakdown early =
        generalized_cost(t, 80.0, 10.0, 0.0, TollProfile{}, Scheme::none);
    CHECK(early.total == doctest::Approx(-13.75).epsilon(1e-12));
    CHECK(early.schedule_delay_cost == doctest::Approx(1.1 * 2.5).epsilon(1e-12));
    // arrive 8 min late: -1.1*(10 + 4*8)
    const CostBreakdown late =
        generalized_cost(t, 93.0, 10.0, 0.0, TollProfile{}, Scheme::none);
    CHECK(late.total == doctest::Approx(-1.1 * 42.0).epsilon(1e-12));
    // c = -theta*tc - payment holds on both branches
    for (const CostBreakdown& c : {early, late})
        CHECK(c.total ==
              doctest::Approx(-1.1 * c.time_equivalent - c.toll_payment).epsilon(1e-12));
}

TEST_CASE("generalized cost: scheme variants") {
    const Traveler t = make_traveler(90.0);
    const TollProfile toll = gaussian_toll(11.0, 80.0, 80.0);

    const CostBreakdown none = generalized_cost(t, 80.0, 10.0, 3.0, toll, Scheme::none);
    const CostBreakdown zero_price =
        generalized_cost(t, 80.0, 10.0, 0.0, toll, Scheme::tcs_distance);
    CHECK(zero_price.total == none.total);  // zero price reduces to no toll

    const CostBreakdown dist = generalized_cost(t, 80.0, 10.0, 3.0, toll, Scheme::tcs_distance);
    CHECK(dist.toll_payment == doctest::Approx(3.0 * 11.0 * 4600.0 * 2e-4).epsilon(1e-12));

    TollProfile time_toll = gaussian_toll(11.0, 80.0, 80.0, 0.08);
    time_toll.basis = TollBasis::per_travel_time;
    const CostBreakdown timed = generalized_cost(t, 80.0, 10.0, 3.0, time_toll, Scheme::tcs_time);
    CHECK(timed.toll_payment == doctest::Approx(3.0 * 11.0 * 10.0 * 0.08).epsilon(1e-12));

    // money toll ignores the credit price
    const CostBreakdown cp =
        generalized_cost(t, 80.0, 10.0, 99.0, toll, Scheme::congestion_pricing);
    CHECK(cp.toll_payment == doctest::Approx(11.0 * 4600.0 * 2e-4).epsilon(1e-12));
}

TEST_CASE("choice probabilities: closed forms") {
    const std::vector<double> equal{-3.0, -3.0};
    const auto p_equal = choice_probabilities(equal, 1.0);
    CHECK(p_equal[0] == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> pair{0.0, -std::log(2.0)};
    const auto p = choice_probabilities(pair, 1.0);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto p_sharp = choice_probabilities(pair, 500.0);
    CHECK(p_sharp[0] > 1.0 - 1e-12);  // deterministic limit

    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("choice probabilities: translation invariance and overflow safety") {
    const std::vector<double> base{-10.0, -12.0, -9.5, -20.0, -11.0};
    std::vector<double> shifted = base;
    for (double& v : shifted) v += 1234.5;
    const auto p0 = choice_probabilities(base, 0.15);
    const auto p1 = choice_probabilities(shifted, 0.15);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(p0[i] - p1[i]) < 1e-12);

    const std::vector<double> huge{-1e8, -1e8 + 3.0};
    const auto ph = choice_probabilities(huge, 1.0);
    CHECK(std::isfinite(ph[0]));
    CHECK(ph[1] > ph[0]);
}

// Remark-1 sign structure via central finite differences of the probability
// map on a 5-alternative instance.
TEST_CASE("logit response to perceived costs has the expected Jacobian structure") {
    const std::vector<double> base{-10.0, -12.0, -9.0, -11.5, -10.5};
    const double mu = 0.15;
    const double h = 1e-5;
    const int n = static_cast<int>(base.size());

    std::vector<std::vector<double>> jac(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j) {
        std::vector<double> up = base, down = base;
        up[static_cast<std::size_t>(j)] += h;
        down[static_cast<std::size_t>(j)] -= h;
        const auto pu = choice_probabilities(up, mu);
        const auto pd = choice_probabilities(down, mu);
        for (int i = 0; i < n; ++i)
            jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                (pu[static_cast<std::size_t>(i)] - pd[static_cast<std::size_t>(i)]) / (2.0 * h);
    }
    for (int i = 0; i < n; ++i) {
        CHECK(jac[i][i] > 0.0);
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i != j) {
                CHECK(jac[i][j] < 0.0);
                CHECK(std::abs(jac[i][j] - jac[j][i]) < 1e-6);
            }
            row += jac[i][j];
        }
        CHECK(std::abs(row) < 1e-8);
    }
}

TEST_CASE("sample_choice: forced choice and realized epsilon") {
    SplitMix64 rng(substream_seed(5, Stream::test));
    const std::vector<double> single{-4.0};
    double eps_sum = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const ChoiceDraw d = sample_choice(single, 0.5, rng);
        CHECK(d.index == 0);
        eps_sum += d.epsilon;
    }
    // mean of Gumbel(0, 2) is 2*gamma ~ 1.1544
    CHECK(eps_sum / 2000.0 == doctest::Approx(2.0 * 0.5772156649).epsilon(0.08));
}

TEST_CASE("sample_choice frequencies converge to the logit probabilities") {
    SplitMix64 rng(substream_seed(17, Stream::test));
    const std::vector<double> pair{0.0, -std::log(2.0)};
    const int n = 100000;
    int first = 0;
    double chosen_eps = 0.0;
    for (int k = 0; k < n; ++k) {
        const ChoiceDraw d = sample_choice(pair, 1.0, rng);
        if (d.index == 0) ++first;
        chosen_eps += d.epsilon;
    }
    const double p = 2.0 / 3.0;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(first / static_cast<double>(n) - p) < 3.0 * sigma);
    CHECK(chosen_eps / n > 0.0);  // selection effect
}

TEST_CASE("gumbel-argmax matches the logit law on five alternatives (chi-square)") {
    SplitMix64 rng(substream_seed(23, Stream::test));
    const std::vector<double> costs{-10.0, -11.0, -9.5, -12.0, -10.2};
    const double mu = 0.7;
    const auto expected = choice_probabilities(costs, mu);
    const int n = 200000;
    std::vector<int> observed(costs.size(), 0);
    for (int k = 0; k < n; ++k) observed[static_cast<std::size_t>(
        sample_choice(costs, mu, rng).index)]++;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        const double e = expected[i] * n;
        chi2 += (observed[i] - e) * (observed[i] - e) / e;
    }
    CHECK(chi2 < 18.467);  // chi-square 0.999 quantile, 4 dof
}

TEST_CASE("learning update") {
    std::vector<double> perceived{-10.0};
    const std::vector<double> experienced{-20.0};
    learning_update(perceived, experienced, 0.7);
    CHECK(perceived[0] == doctest::Approx(-13.0).epsilon(1e-12));

    // fixed point
    std::vector<double> fixed{-20.0};
    learning_update(fixed, experienced, 0.7);
    CHECK(fixed[0] == -20.0);

    // near-pure memory
    std::vector<double> memory{-10.0};
    learning_update(memory, experienced, 0.999999);
    CHECK(memory[0] == doctest::Approx(-10.0).epsilon(1e-4));

    // contraction in the sup norm when experienced costs are held fixed
    std::vector<double> c{-5.0, -9.0, -1.0};
    const std::vector<double> target{-6.0, -6.0, -6.0};
    double before = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        before = std::max(before, std::abs(c[i] - target[i]));
    learning_update(c, target, 0.7);
    double after = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        after = std::max(after, std::abs(c[i] - target[i]));
    CHECK(after == doctest::Approx(0.7 * before).epsilon(1e-12));

    std::vector<double> short_vec{-1.0};
    const std::vector<double> long_vec{-1.0, -2.0};
    CHECK_THROWS_AS(learning_update(short_vec, long_vec, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(learning_update(c, target, 1.0), std::invalid_argument);
}
