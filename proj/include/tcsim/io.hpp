#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcsim/bayesopt.hpp"
#include "tcsim/day2day.hpp"
#include "tcsim/scenario.hpp"

namespace tcsim {

inline constexpr int kOutputSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

// Fixed column order, dot decimal, header row; byte-stable for a fixed run.
void write_days_csv(std::ostream& out, const std::vector<DayRecord>& records);
void write_summary_json(std::ostream& out, const ScenarioConfig& config, const RunResult& result);
void write_departure_histogram_csv(std::ostream& out, std::span<const double> departures,
                                   double bin_minutes = 5.0);
void write_comparison_csv(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<RunResult>& results);
void write_trace_csv_header(std::ostream& out, const std::vector<std::string>& parameter_names);
void write_trace_csv_row(std::ostream& out, const TraceRow& row);

std::string fnv1a_hex(const std::string& bytes);
std::string file_hash(const std::string& path);
std::string iso8601_utc_now();

// Writes manifest.json listing every emitted file with its content hash.
void write_manifest(const std::string& out_dir, const ScenarioConfig& config,
                    const std::vector<std::string>& output_files, const std::string& started,
                    const std::string& finished);

}  // namespace tcsim
