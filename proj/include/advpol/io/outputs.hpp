#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "advpol/harness/harness.hpp"

namespace advpol {

/// Column order of the metrics table.
inline constexpr const char* kMetricsHeader =
    "iteration,samples,mean_ext_return,mean_int_return,asr_eval,tau,lagrange_multiplier,entropy_proxy,wall_seconds";

/// Decimal rendering with 9 significant digits.
std::string format_decimal(double value);
/// Rounds to 9 significant digits so JSON output carries no more.
double round9(double value);

std::string metrics_row(const IterationRecord& record);
std::string metrics_csv(const std::vector<IterationRecord>& records);

nlohmann::json eval_to_json(const EvalResult& eval);
nlohmann::json report_to_json(const AttackReport& report, const ExperimentConfig& config);

struct OutputPaths {
  std::filesystem::path config, metrics, report, adversary;
};

OutputPaths output_paths(const std::filesystem::path& dir);

/// Writes the resolved config, metrics table, report and (if present) the
/// adversary checkpoint, each by write-then-rename.
OutputPaths write_outputs(const AttackReport& report, const ExperimentConfig& config,
                          const std::filesystem::path& dir);

}  // namespace advpol
