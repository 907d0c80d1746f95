#pragma once

#include <string>

#include "locfuse/eval.hpp"

namespace locfuse {

// Experiment config: [experiment] section plus optional [forest classify] /
// [forest regress] overrides. Missing keys keep the defaults.
std::string write_experiment_config(const ExperimentConfig& config);
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Report directory: summary.csv (one row per technology x method) and one
// errors_<tech>.csv per technology. Deterministic bytes for a fixed report.
void write_report_files(const ExperimentReport& report, const std::string& directory);
std::string write_report_summary_csv(const ExperimentReport& report);

}  // namespace locfuse
