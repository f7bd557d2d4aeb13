#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rpkf/cli/config.hpp"
#include "rpkf/cli/csv.hpp"
#include "rpkf/sim_harness.hpp"

namespace rpkf::cli {

// Output file names inside the output directory.
inline constexpr const char* kEstimatesFile = "estimates.csv";
inline constexpr const char* kTruthFile = "truth.csv";
inline constexpr const char* kMeasurementsFile = "measurements.csv";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kSweepFile = "sweep.csv";

/// `k, xhat_1..xhat_r, P_11, P_12, .., P_rr` (upper triangle, row-major).
CsvTable estimates_table(const std::vector<FilterState>& states);

/// Per-step squared error and NEES rows `k, E_k2, mean_nees`.
CsvTable metrics_table(const RunMetrics& metrics);

// Each mode writes its files and returns the paths written. Errors throw.
std::vector<std::filesystem::path> run_filter(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_simulate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_montecarlo(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_sweep(const ExperimentConfig& cfg);

/// Dispatches on cfg.mode. Returns 0 on success; on any failure writes a
/// diagnostic to `err` and returns 1.
int run(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace rpkf::cli
