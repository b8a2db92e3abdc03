#include "tcsim/day2day.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace tcsim {

using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSnapshotSchema = 1;
}  // namespace

WelfareComponents compute_welfare(std::span<const CostBreakdown> chosen_costs,
                                  std::span<const double> epsilon, const Transactions* transactions,
                                  double price, Scheme scheme) {
    const std::size_t n = chosen_costs.size();
    WelfareComponents w;
    if (n == 0) return w;

    long double cs = 0.0L, direct = 0.0L, toll_paid = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const CostBreakdown& c = chosen_costs[i];
        cs += c.total + epsilon[i];
        direct += -(c.travel_time_cost + c.schedule_delay_cost) + epsilon[i];
        toll_paid += c.toll_payment;
    }
    const long double inv_n = 1.0L / static_cast<long double>(n);
    w.consumer_surplus = static_cast<double>(cs * inv_n);
    w.direct_total = static_cast<double>(direct * inv_n);

    if (scheme_uses_credits(scheme)) {
        if (transactions == nullptr)
            throw std::invalid_argument("compute_welfare: TCS requires transactions");
        long double tr = 0.0L, rr = 0.0L, te = 0.0L;
        for (const TravelerTransaction& t : transactions->per_traveler) {
            tr += t.sold * price;
            rr += t.bought * price;
            te += t.from_endowment * price;
        }
        w.traveler_revenue = static_cast<double>(tr * inv_n);
        w.regulator_revenue = static_cast<double>(rr * inv_n);
        w.regulator_cost = w.traveler_revenue;
        w.endowment_value = static_cast<double>(te * inv_n);
        w.total = w.consumer_surplus + w.traveler_revenue + w.regulator_revenue -
                  w.regulator_cost + w.endowment_value;
    } else if (scheme == Scheme::congestion_pricing) {
        w.regulator_revenue = static_cast<double>(toll_paid * inv_n);
        w.total = w.consumer_surplus + w.regulator_revenue;
    } else {
        w.total = w.consumer_surplus;
    }
    return w;
}

Simulation::Simulation(const ScenarioConfig& config) : cfg_(config) {
    population_ = generate_population(cfg_.population);
    const std::size_t n = population_.size();
    const int alts = cfg_.population.alternatives();
    window_.resize(n * static_cast<std::size_t>(alts));
    lengths_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lengths_[i] = population_[i].trip_length_m;
        for (int a = 0; a < alts; ++a)
            window_[i * static_cast<std::size_t>(alts) + static_cast<std::size_t>(a)] =
                window_time(population_[i], cfg_.population, a);
    }
    perception_.assign(n * static_cast<std::size_t>(alts), 0.0);
    price_ = cfg_.market.price;
    departures_.resize(n);
    chosen_.resize(n);
    epsilon_.resize(n);
    experienced_.resize(n * static_cast<std::size_t>(alts));
    chosen_cost_.resize(n);

    if (cfg_.warm_start) load_snapshot(*cfg_.warm_start);
}

DayRecord Simulation::run_day(bool want_detail) {
    const std::size_t n = population_.size();
    const int alts = cfg_.population.alternatives();
    const std::size_t stride = static_cast<std::size_t>(alts);

    // 1. departure-time choice (predetermined plan on a cold day 0)
    if (has_perception_) {
        for (std::size_t i = 0; i < n; ++i) {
            SplitMix64 rng(substream_seed(cfg_.seed, Stream::choice, static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(day_)));
            const ChoiceDraw draw = sample_choice(
                std::span<const double>(perception_.data() + i * stride, stride),
                cfg_.logit_scale, rng);
            chosen_[i] = draw.index;
            epsilon_[i] = draw.epsilon;
            departures_[i] = window_[i * stride + static_cast<std::size_t>(draw.index)];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            chosen_[i] = cfg_.population.window_half_steps;
            epsilon_[i] = 0.0;
            departures_[i] = population_[i].initial_departure_min;
        }
    }

    // 2. one network day
    const DayTrajectory traj = simulate_day(departures_, lengths_, cfg_.speed);

    // 3. experienced cost for the chosen slot, estimated for the others
    for (std::size_t i = 0; i < n; ++i) {
        const Traveler& trav = population_[i];
        for (int a = 0; a < alts; ++a) {
            const double depart = window_[i * stride + static_cast<std::size_t>(a)];
            const double tt = a == chosen_[i]
                                  ? traj.travel_time[i]
                                  : fictional_travel_time(traj, depart, trav.trip_length_m);
            const CostBreakdown cost =
                generalized_cost(trav, depart, tt, price_, cfg_.toll, cfg_.scheme);
            experienced_[i * stride + static_cast<std::size_t>(a)] = cost.total;
            if (a == chosen_[i]) chosen_cost_[i] = cost;
        }
    }

    DayRecord rec;
    rec.day = day_;
    rec.price = price_;

    // 4. inconsistency between perceived and experienced costs
    if (has_perception_) {
        long double l1 = 0.0L, norm = 0.0L;
        for (std::size_t k = 0; k < perception_.size(); ++k) {
            l1 += std::abs(perception_[k] - experienced_[k]);
            norm += std::abs(perception_[k]);
        }
        rec.inconsistency = static_cast<double>(l1 / static_cast<long double>(n));
        rec.gap_pct = norm > 0.0L ? static_cast<double>(l1 / norm * 100.0L) : 0.0;
    } else {
        rec.inconsistency = kNaN;
        rec.gap_pct = kNaN;
    }

    // 5. credit settlement
    Transactions tx;
    if (scheme_uses_credits(cfg_.scheme)) {
        tx = settle_day(departures_, traj.travel_time, lengths_, cfg_.toll,
                        cfg_.market.endowment);
        rec.excess = tx.excess;
        const double inv_n = 1.0 / static_cast<double>(n);
        rec.consumed = tx.total_consumed * inv_n;
        rec.bought = tx.total_bought * inv_n;
        rec.sold = tx.total_sold * inv_n;
        rec.from_endowment = tx.total_from_endowment * inv_n;
    }

    // 6. welfare, both via components and via the direct reduction
    rec.welfare = compute_welfare(chosen_cost_, epsilon_,
                                  scheme_uses_credits(cfg_.scheme) ? &tx : nullptr, price_,
                                  cfg_.scheme);
    rec.welfare_identity_gap = std::abs(rec.welfare.total - rec.welfare.direct_total);

    {
        long double tt = 0.0L, ttc = 0.0L, sdc = 0.0L, toll = 0.0L, eps_sum = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            tt += traj.travel_time[i];
            ttc += chosen_cost_[i].travel_time_cost;
            sdc += chosen_cost_[i].schedule_delay_cost;
            toll += chosen_cost_[i].toll_payment;
            eps_sum += epsilon_[i];
        }
        const long double inv_n = 1.0L / static_cast<long double>(n);
        rec.mean_travel_time = static_cast<double>(tt * inv_n);
        rec.travel_time_cost = static_cast<double>(ttc * inv_n);
        rec.schedule_delay_cost = static_cast<double>(sdc * inv_n);
        rec.toll_payment = static_cast<double>(toll * inv_n);
        rec.random_utility = static_cast<double>(eps_sum * inv_n);
    }
    rec.peak_accumulation = traj.peak_accumulation;

    if (want_detail) {
        auto detail = std::make_shared<DayDetail>();
        detail->chosen_departure = departures_;
        detail->travel_time = traj.travel_time;
        detail->epsilon = epsilon_;
        detail->chosen_cost = chosen_cost_;
        detail->experienced_costs = experienced_;
        detail->trajectory = traj;
        detail->transactions = tx;
        rec.detail = std::move(detail);
    }

    // 7. learning, then the price step for the next day
    if (has_perception_) {
        learning_update(perception_, experienced_, cfg_.learning_weight);
    } else {
        perception_ = experienced_;
        has_perception_ = true;
    }
    if (scheme_uses_credits(cfg_.scheme))
        price_ = update_price(price_, rec.excess, cfg_.market.adjustment_rate);

    ++day_;
    return rec;
}

double Simulation::min_endowment_per_capita() const {
    return min_endowment(population_, cfg_.population, cfg_.toll);
}

RunResult Simulation::run_to_convergence() {
    RunResult result;
    result.summary.tail_days = cfg_.convergence.tail_days;

    if (scheme_uses_credits(cfg_.scheme)) {
        result.summary.min_endowment_value = min_endowment_per_capita();
        result.summary.feasibility_warning =
            cfg_.market.endowment <= result.summary.min_endowment_value;
    }

    std::vector<int> record_days(cfg_.record_days.begin(), cfg_.record_days.end());
    const bool want_last = std::find(record_days.begin(), record_days.end(), -1) !=
                           record_days.end();

    int consecutive = 0;
    DayRecord last_detailed;
    for (int d = 0; d < cfg_.days; ++d) {
        const bool explicit_detail =
            std::find(record_days.begin(), record_days.end(), day_) != record_days.end();
        DayRecord rec = run_day(explicit_detail || want_last);
        if (want_last) {
            last_detailed = rec;
            if (!explicit_detail) rec.detail = nullptr;  // keep history lean
        }
        result.records.push_back(rec);

        if (std::isfinite(rec.gap_pct) && rec.gap_pct < cfg_.convergence.gap_threshold_pct)
            ++consecutive;
        else
            consecutive = 0;
        if (consecutive >= cfg_.convergence.consecutive_days) {
            result.summary.converged = true;
            result.summary.converged_day = rec.day;
            break;
        }
    }
    result.summary.days_run = static_cast<int>(result.records.size());
    if (want_last && last_detailed.detail && !result.records.empty())
        result.records.back().detail = last_detailed.detail;

    // Equilibrium statistics: mean and std over the final tail days (day 0 is
    // excluded; it has no choice randomness and no perception).
    std::vector<const DayRecord*> tail;
    for (auto it = result.records.rbegin();
         it != result.records.rend() && static_cast<int>(tail.size()) < cfg_.convergence.tail_days;
         ++it) {
        if (it->day >= 1) tail.push_back(&*it);
    }
    auto stat = [&](auto getter) {
        EquilibriumStat s;
        if (tail.empty()) return s;
        long double sum = 0.0L;
        for (const DayRecord* r : tail) sum += getter(*r);
        s.mean = static_cast<double>(sum / static_cast<long double>(tail.size()));
        if (tail.size() > 1) {
            long double ss = 0.0L;
            for (const DayRecord* r : tail) {
                const long double dlt = getter(*r) - s.mean;
                ss += dlt * dlt;
            }
            s.stddev =
                static_cast<double>(std::sqrt(ss / static_cast<long double>(tail.size() - 1)));
        }
        return s;
    };
    auto& m = result.summary.metrics;
    m["travel_time_cost"] = stat([](const DayRecord& r) { return r.travel_time_cost; });
    m["schedule_delay_cost"] = stat([](const DayRecord& r) { return r.schedule_delay_cost; });
    m["random_utility"] = stat([](const DayRecord& r) { return r.random_utility; });
    m["consumer_surplus"] = stat([](const DayRecord& r) { return r.welfare.consumer_surplus; });
    m["social_welfare"] = stat([](const DayRecord& r) { return r.welfare.total; });
    m["toll_payment"] = stat([](const DayRecord& r) { return r.toll_payment; });
    m["credit_price"] = stat([](const DayRecord& r) { return r.price; });
    m["peak_accumulation"] =
        stat([](const DayRecord& r) { return static_cast<double>(r.peak_accumulation); });
    m["mean_travel_time"] = stat([](const DayRecord& r) { return r.mean_travel_time; });
    m["gap_pct"] = stat([](const DayRecord& r) { return r.gap_pct; });
    m["inconsistency"] = stat([](const DayRecord& r) { return r.inconsistency; });
    m["consumed"] = stat([](const DayRecord& r) { return r.consumed; });
    m["bought"] = stat([](const DayRecord& r) { return r.bought; });
    m["sold"] = stat([](const DayRecord& r) { return r.sold; });
    m["excess"] = stat([](const DayRecord& r) { return r.excess; });
    return result;
}

void Simulation::save_snapshot(const std::string& path) const {
    json snap;
    snap["schema_version"] = kSnapshotSchema;
    snap["kind"] = "tcsim-state";
    snap["scheme"] = scheme_name(cfg_.scheme);
    snap["n"] = population_.size();
    snap["alternatives"] = cfg_.population.alternatives();
    snap["day"] = day_;
    snap["price"] = price_;
    snap["has_perception"] = has_perception_;
    snap["population_fingerprint"] = population_fingerprint(population_);
    snap["perception"] = perception_;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("snapshot: cannot write " + path);
    out << snap.dump();
}

void Simulation::load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path);
    json snap;
    try {
        in >> snap;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("snapshot: invalid file " + path + ": " + e.what());
    }
    if (!snap.is_object() || snap.value("kind", "") != "tcsim-state")
        throw std::runtime_error("snapshot: " + path + " is not a state snapshot");
    if (snap.value("schema_version", -1) != kSnapshotSchema)
        throw std::runtime_error("snapshot: unsupported schema version in " + path);
    if (snap.value("n", std::size_t{0}) != population_.size())
        throw std::runtime_error("snapshot: population size mismatch in " + path);
    if (snap.value("alternatives", -1) != cfg_.population.alternatives())
        throw std::runtime_error("snapshot: departure window shape mismatch in " + path);
    if (snap.value("population_fingerprint", "") != population_fingerprint(population_))
        throw std::runtime_error("snapshot: population fingerprint mismatch in " + path);

    const auto& stored = snap.at("perception");
    if (!stored.is_array() || stored.size() != perception_.size())
        throw std::runtime_error("snapshot: perception shape mismatch in " + path);
    for (std::size_t i = 0; i < perception_.size(); ++i) perception_[i] = stored[i].get<double>();
    has_perception_ = snap.value("has_perception", true);
    day_ = snap.value("day", 0);
    // The stored price carries over only within the same scheme; switching
    // schemes restarts the market from the configured initial price.
    if (snap.value("scheme", "") == scheme_name(cfg_.scheme)) price_ = snap.value("price", 0.0);
}

RunResult run_to_convergence(const ScenarioConfig& config) {
    Simulation sim(config);
    return sim.run_to_convergence();
}

std::vector<EndowmentPoint> sweep_endowment(const ScenarioConfig& config,
                                            const std::vector<double>& endowments, int workers) {
    std::vector<EndowmentPoint> points(endowments.size());
    const int n_workers = std::max(1, workers);

    std::vector<std::future<void>> inflight;
    std::size_t next = 0;
    auto launch = [&](std::size_t idx) {
        inflight.push_back(std::async(std::launch::async, [&points, &endowments, &config, idx] {
            ScenarioConfig cfg = config;
            cfg.market.endowment = endowments[idx];
            const RunResult result = run_to_convergence(cfg);
            points[idx] = {endowments[idx], result.summary.metrics.at("credit_price").mean,
                           result.summary.converged};
        }));
    };
    while (next < endowments.size() || !inflight.empty()) {
        while (next < endowments.size() && static_cast<int>(inflight.size()) < n_workers)
            launch(next++);
        inflight.front().get();
        inflight.erase(inflight.begin());
    }
    return points;
}

}  // namespace tcsim
