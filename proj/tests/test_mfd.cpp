#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "tcsim/mfd.hpp"
#include "tcsim/rng.hpp"

using namespace tcsim;

namespace {

const SpeedFunction kTable2Speed{586.8, 4500.0};

// Independent scalar route for the speed-MFD formula.
double speed_oracle(double n) {
    const double x = 1.0 - n / 4500.0;
    return 586.8 * x * x;
}

}  // namespace

TEST_CASE("speed function endpoints and interior value") {
    CHECK(eval_speed(kTable2Speed, 0.0) == doctest::Approx(586.8).epsilon(1e-12));
    CHECK(eval_speed(kTable2Speed, 4500.0) == 0.0);
    CHECK(eval_speed(kTable2Speed, 1500.0) == doctest::Approx(586.8 * 4.0 / 9.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval_speed(kTable2Speed, -1.0), std::out_of_range);
    CHECK_THROWS_AS(eval_speed(kTable2Speed, 4501.0), std::out_of_range);
}

TEST_CASE("single traveler: self-inclusive accumulation, free flow in the limit") {
    const std::array<double, 1> dep{30.0};
    const std::array<double, 1> len{4600.0};

    // At production jam capacity the lone traveler counts toward the
    // accumulation, so the whole trip runs at V(1).
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);
    CHECK(traj.travel_time[0] == doctest::Approx(4600.0 / speed_oracle(1.0)).epsilon(1e-12));
    CHECK(traj.peak_accumulation == 1);
    CHECK(traj.events.size() == 2);

    // With a vast jam capacity the network is effectively empty: T = L / v_f.
    const SpeedFunction idealized{586.8, 1e12};
    const DayTrajectory free_flow = simulate_day(dep, len, idealized);
    CHECK(std::abs(free_flow.travel_time[0] - 4600.0 / 586.8) < 1e-9);
}

// Hand event trace for two overlapping travelers, L=1000 m each, departures
// at t=0 and t=0.5 min:
//   [0.0, 0.5): one traveler at V(1)
//   [0.5, tA):  two travelers at V(2); A exits when its remaining distance
//               1000 - 0.5*V(1) is covered: tA = 0.5 + (1000 - 0.5*V(1))/V(2)
//   [tA, tB):   B finishes its remainder at V(1):
//               tB = tA + (1000 - (tA - 0.5)*V(2))/V(1)
TEST_CASE("two-traveler day matches the hand event trace") {
    const double v1 = speed_oracle(1.0);
    const double v2 = speed_oracle(2.0);
    const double tA = 0.5 + (1000.0 - 0.5 * v1) / v2;
    const double tB = tA + (1000.0 - (tA - 0.5) * v2) / v1;

    const std::array<double, 2> dep{0.0, 0.5};
    const std::array<double, 2> len{1000.0, 1000.0};
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);

    CHECK(traj.travel_time[0] == doctest::Approx(tA).epsilon(1e-12));
    CHECK(traj.travel_time[1] == doctest::Approx(tB - 0.5).epsilon(1e-12));
    CHECK(traj.peak_accumulation == 2);

    // trip-length conservation through the cumulative distance curve
    for (int i = 0; i < 2; ++i)
        CHECK(traj.distance_at(traj.arrival_time[i]) - traj.distance_at(dep[i]) ==
              doctest::Approx(1000.0).epsilon(1e-9));
}

TEST_CASE("vanishing trip lengths leave only departure clustering") {
    const int n = 40;
    std::vector<double> dep(n, 10.0), len(n, 1e-6);
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);
    CHECK(traj.peak_accumulation == n);
    for (int i = 0; i < n; ++i) CHECK(traj.travel_time[i] < 1e-6);
}

TEST_CASE("fictional traveler on an empty network reduces to free flow") {
    const DayTrajectory empty = simulate_day({}, {}, kTable2Speed);
    CHECK(std::abs(fictional_travel_time(empty, 12.0, 4600.0) - 4600.0 / 586.8) < 1e-9);
    CHECK(std::abs(fictional_travel_time(empty, -50.0, 4600.0) - 4600.0 / 586.8) < 1e-9);
}

TEST_CASE("fictional estimate of a real trip equals the experienced travel time") {
    const std::array<double, 2> dep{0.0, 0.5};
    const std::array<double, 2> len{1000.0, 1000.0};
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);
    for (int i = 0; i < 2; ++i)
        CHECK(fictional_travel_time(traj, dep[i], len[i]) ==
              doctest::Approx(traj.travel_time[i]).epsilon(1e-10));
}

TEST_CASE("fictional traveler mid-congestion matches hand integration") {
    const double v1 = speed_oracle(1.0);
    const double v2 = speed_oracle(2.0);
    const std::array<double, 2> dep{0.0, 0.5};
    const std::array<double, 2> len{1000.0, 1000.0};
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);

    // Departing at 0.25 with 400 m: 0.25 min at V(1), remainder at V(2)
    // (covered well before the first real arrival).
    const double by_hand = 0.25 + (400.0 - 0.25 * v1) / v2;
    CHECK(fictional_travel_time(traj, 0.25, 400.0) == doctest::Approx(by_hand).epsilon(1e-12));

    // Departing after the last arrival: empty network again.
    const double after = traj.knot_time.back() + 5.0;
    CHECK(fictional_travel_time(traj, after, 4600.0) ==
          doctest::Approx(4600.0 / 586.8).epsilon(1e-12));
}

TEST_CASE("trip-length conservation and event ordering on a random day") {
    SplitMix64 rng(substream_seed(2024, Stream::test));
    const int n = 200;
    std::vector<double> dep(n), len(n);
    for (int i = 0; i < n; ++i) {
        dep[i] = 60.0 + 30.0 * rng.next_normal();
        len[i] = 3000.0 + 2000.0 * rng.next_double();
    }
    const DayTrajectory traj = simulate_day(dep, len, kTable2Speed);

    int departures = 0, arrivals = 0;
    double last_time = -1e300;
    for (const TrajectoryEvent& e : traj.events) {
        CHECK(e.time_min >= last_time);
        last_time = e.time_min;
        (e.kind == EventKind::departure ? departures : arrivals)++;
        CHECK(e.accumulation_after >= 0);
    }
    CHECK(departures == n);
    CHECK(arrivals == n);
    for (int i = 0; i < n; ++i) {
        CHECK(traj.arrival_time[i] > dep[i]);
        const double covered = traj.distance_at(traj.arrival_time[i]) - traj.distance_at(dep[i]);
        CHECK(std::abs(covered - len[i]) <= 1e-6 * len[i]);
    }
    // D(t) is nondecreasing with strictly increasing knots
    for (std::size_t k = 1; k < traj.knot_time.size(); ++k) {
        CHECK(traj.knot_time[k] > traj.knot_time[k - 1]);
        CHECK(traj.knot_distance[k] >= traj.knot_distance[k - 1]);
    }
}

TEST_CASE("adding a traveler never speeds anyone up") {
    SplitMix64 rng(substream_seed(7, Stream::test));
    std::vector<double> dep, len;
    for (int i = 0; i < 5; ++i) {
        dep.push_back(10.0 * rng.next_double());
        len.push_back(2000.0 + 1000.0 * rng.next_double());
    }
    const DayTrajectory before = simulate_day(dep, len, kTable2Speed);
    dep.push_back(2.0);
    len.push_back(2500.0);
    const DayTrajectory after = simulate_day(dep, len, kTable2Speed);
    for (int i = 0; i < 5; ++i)
        CHECK(after.travel_time[i] >= before.travel_time[i] - 1e-12);
}

TEST_CASE("simultaneous events resolve arrivals first, then by id") {
    // Two identical travelers arrive at the same instant: ids in order.
    const std::array<double, 2> dep{0.0, 0.0};
    const std::array<double, 2> len{500.0, 500.0};
    const DayTrajectory traj = simulate_day(dep, len, SpeedFunction{100.0, 1000.0});
    REQUIRE(traj.events.size() == 4);
    CHECK(traj.events[0].traveler == 0);
    CHECK(traj.events[1].traveler == 1);
    CHECK(traj.events[2].kind == EventKind::arrival);
    CHECK(traj.events[2].traveler == 0);
    CHECK(traj.events[3].traveler == 1);
    CHECK(traj.travel_time[0] == traj.travel_time[1]);
}

TEST_CASE("gridlock aborts with the first gridlock time") {
    const SpeedFunction tiny{100.0, 3.0};
    const std::array<double, 3> dep{0.0, 1.0, 2.0};
    const std::array<double, 3> len{1e6, 1e6, 1e6};
    CHECK_THROWS_AS(simulate_day(dep, len, tiny), GridlockError);
    try {
        simulate_day(dep, len, tiny);
    } catch (const GridlockError& e) {
        CHECK(e.time_min == 2.0);
    }
}

TEST_CASE("invalid inputs are rejected") {
    const std::array<double, 1> dep{0.0};
    const std::array<double, 1> bad_len{0.0};
    CHECK_THROWS_AS(simulate_day(dep, bad_len, kTable2Speed), std::invalid_argument);
    const std::array<double, 1> nan_dep{std::nan("")};
    const std::array<double, 1> len{100.0};
    CHECK_THROWS_AS(simulate_day(nan_dep, len, kTable2Speed), std::invalid_argument);
}
