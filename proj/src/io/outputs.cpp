#include "advpol/io/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "advpol/approximator/checkpoint.hpp"
#include "advpol/io/config_io.hpp"
#include "advpol/io/files.hpp"

namespace advpol {

std::string format_decimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double round9(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_decimal(value).c_str(), nullptr);
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(round9(v)) : nlohmann::json(); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_decimal(*v) : std::string(); }

}  // namespace

std::string metrics_row(const IterationRecord& r) {
  std::string s = std::to_string(r.iteration) + "," + std::to_string(r.samples);
  for (const std::string& cell :
       {format_decimal(r.mean_ext_return), format_decimal(r.mean_int_return), optional_cell(r.asr_eval),
        format_decimal(r.tau), format_decimal(r.lagrange_multiplier), format_decimal(r.entropy_proxy),
        optional_cell(r.wall_seconds)}) {
    s += "," + cell;
  }
  return s;
}

std::string metrics_csv(const std::vector<IterationRecord>& records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : records) out += metrics_row(r) + "\n";
  return out;
}

nlohmann::json eval_to_json(const EvalResult& e) {
  return {{"episodes", e.episodes},
          {"victim_failures", e.victim_failures},
          {"victim_mean_reward", round9(e.victim_mean_reward)},
          {"victim_std_reward", round9(e.victim_std_reward)},
          {"mean_adversary_return", round9(e.mean_adversary_return)},
          {"failure_fraction", round9(e.failure_fraction)},
          {"asr", round9(e.asr)}};
}

nlohmann::json report_to_json(const AttackReport& report, const ExperimentConfig& config) {
  nlohmann::json j;
  j["environment"] = config.env.name;
  j["threat_model"] = threat_model_name(config.threat.kind);
  j["regularizer"] = report.regularizer;
  j["br_enabled"] = report.br_enabled;
  j["seed"] = config.run.seed;
  j["samples"] = report.samples;
  j["iterations"] = report.iterations.size();
  j["buffer_size"] = report.buffer_size;
  j["victim_checksum_before"] = report.victim_checksum_before;
  j["victim_checksum_after"] = report.victim_checksum_after;
  j["victim_frozen"] = report.victim_checksum_before == report.victim_checksum_after;
  if (!report.iterations.empty()) {
    const auto& last = report.iterations.back();
    j["final_tau"] = round9(last.tau);
    j["final_lagrange_multiplier"] = round9(last.lagrange_multiplier);
    j["final_entropy_proxy"] = number_or_null(last.entropy_proxy);
  }
  j["final_eval"] = report.final_eval ? eval_to_json(*report.final_eval) : nlohmann::json();
  j["asr"] = report.final_eval ? nlohmann::json(round9(report.final_eval->asr)) : nlohmann::json();
  j["error"] = report.error.empty() ? nlohmann::json() : nlohmann::json(report.error);
  return j;
}

OutputPaths output_paths(const std::filesystem::path& dir) {
  return {dir / "config.json", dir / "metrics.csv", dir / "report.json", dir / "adversary.json"};
}

OutputPaths write_outputs(const AttackReport& report, const ExperimentConfig& config,
                          const std::filesystem::path& dir) {
  const OutputPaths p = output_paths(dir);
  write_config(p.config, config);
  write_file_atomic(p.metrics, metrics_csv(report.iterations));
  write_file_atomic(p.report, report_to_json(report, config).dump(2) + "\n");
  if (report.adversary.num_parameters() > 0) {
    save_policy(p.adversary, report.adversary,
                {{"role", "adversary"}, {"regularizer", report.regularizer}, {"seed", config.run.seed}});
  }
  return p;
}

}  // namespace advpol
