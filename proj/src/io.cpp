#include "tcsim/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace tcsim {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void write_days_csv(std::ostream& out, const std::vector<DayRecord>& records) {
    out << "day,price,excess,inconsistency,gap_pct,consumer_surplus,traveler_revenue,"
           "regulator_revenue,regulator_cost,endowment_value,social_welfare,"
           "mean_travel_time,travel_time_cost,schedule_delay_cost,toll_payment,"
           "random_utility,consumed,bought,sold,from_endowment,peak_accumulation\n";
    for (const DayRecord& r : records) {
        out << r.day << ',' << fmt(r.price) << ',' << fmt(r.excess) << ','
            << fmt(r.inconsistency) << ',' << fmt(r.gap_pct) << ','
            << fmt(r.welfare.consumer_surplus) << ',' << fmt(r.welfare.traveler_revenue) << ','
            << fmt(r.welfare.regulator_revenue) << ',' << fmt(r.welfare.regulator_cost) << ','
            << fmt(r.welfare.endowment_value) << ',' << fmt(r.welfare.total) << ','
            << fmt(r.mean_travel_time) << ',' << fmt(r.travel_time_cost) << ','
            << fmt(r.schedule_delay_cost) << ',' << fmt(r.toll_payment) << ','
            << fmt(r.random_utility) << ',' << fmt(r.consumed) << ',' << fmt(r.bought) << ','
            << fmt(r.sold) << ',' << fmt(r.from_endowment) << ',' << r.peak_accumulation << '\n';
    }
}

void write_summary_json(std::ostream& out, const ScenarioConfig& config, const RunResult& result) {
    json summary;
    summary["schema_version"] = kOutputSchemaVersion;
    summary["scenario"] = config.name;
    summary["scheme"] = scheme_name(config.scheme);
    summary["seed"] = config.seed;
    summary["converged"] = result.summary.converged;
    summary["converged_day"] = result.summary.converged_day;
    summary["days_run"] = result.summary.days_run;
    summary["tail_days"] = result.summary.tail_days;
    summary["feasibility_warning"] = result.summary.feasibility_warning;
    summary["min_endowment"] = result.summary.min_endowment_value;
    json metrics;
    for (const auto& [key, stat] : result.summary.metrics)
        metrics[key] = {{"mean", stat.mean}, {"std", stat.stddev}};
    summary["equilibrium"] = metrics;
    out << summary.dump(2) << '\n';
}

void write_departure_histogram_csv(std::ostream& out, std::span<const double> departures,
                                   double bin_minutes) {
    std::map<int, int> bins;
    for (double t : departures) bins[static_cast<int>(std::floor(t / bin_minutes))]++;
    out << "bin_start_min,bin_end_min,departures\n";
    for (const auto& [bin, count] : bins)
        out << fmt(bin * bin_minutes) << ',' << fmt((bin + 1) * bin_minutes) << ',' << count
            << '\n';
}

void write_comparison_csv(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<RunResult>& results) {
    // Signs follow the reporting convention: costs negative, revenues positive.
    out << "scenario,stat,travel_time_cost,schedule_delay,random_utility,consumer_surplus,"
           "social_welfare,toll_payment,credit_price,peak_accumulation,converged\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& m = results[i].summary.metrics;
        auto mean = [&](const char* k) { return m.at(k).mean; };
        auto stddev = [&](const char* k) { return m.at(k).stddev; };
        out << names[i] << ",mean," << fmt(-mean("travel_time_cost")) << ','
            << fmt(-mean("schedule_delay_cost")) << ',' << fmt(mean("random_utility")) << ','
            << fmt(mean("consumer_surplus")) << ',' << fmt(mean("social_welfare")) << ','
            << fmt(mean("toll_payment")) << ',' << fmt(mean("credit_price")) << ','
            << fmt(mean("peak_accumulation")) << ',' << (results[i].summary.converged ? 1 : 0)
            << '\n';
        out << names[i] << ",std," << fmt(stddev("travel_time_cost")) << ','
            << fmt(stddev("schedule_delay_cost")) << ',' << fmt(stddev("random_utility")) << ','
            << fmt(stddev("consumer_surplus")) << ',' << fmt(stddev("social_welfare")) << ','
            << fmt(stddev("toll_payment")) << ',' << fmt(stddev("credit_price")) << ','
            << fmt(stddev("peak_accumulation")) << ",\n";
    }
}

void write_trace_csv_header(std::ostream& out, const std::vector<std::string>& parameter_names) {
    out << "iteration";
    for (const std::string& p : parameter_names) out << ',' << p;
    out << ",objective,acquisition,best_so_far,penalized\n";
}

void write_trace_csv_row(std::ostream& out, const TraceRow& row) {
    out << row.iteration;
    for (double p : row.params) out << ',' << fmt(p);
    out << ',' << fmt(row.objective) << ',' << fmt(row.acquisition) << ','
        << fmt(row.best_so_far) << ',' << (row.penalized ? 1 : 0) << '\n';
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_hash: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hex(buf.str());
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& out_dir, const ScenarioConfig& config,
                    const std::vector<std::string>& output_files, const std::string& started,
                    const std::string& finished) {
    json manifest;
    manifest["schema_version"] = kOutputSchemaVersion;
    manifest["code_version"] = kCodeVersion;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.seed;
    manifest["started_utc"] = started;
    manifest["finished_utc"] = finished;
    json files = json::array();
    for (const std::string& f : output_files)
        files.push_back({{"path", f}, {"hash", file_hash(out_dir + "/" + f)}});
    manifest["outputs"] = files;
    std::ofstream out(out_dir + "/manifest.json");
    if (!out) throw std::runtime_error("manifest: cannot write to " + out_dir);
    out << manifest.dump(2) << '\n';
}

}  // namespace tcsim
