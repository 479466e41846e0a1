#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "advpol/harness/config.hpp"

namespace advpol {

/// Thrown for malformed configs. The message names the key path, or the line
/// for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved key tree (every field present).
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Applies defaults for missing keys, rejects unknown keys, then validates.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Parses JSON text (comments allowed).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ExperimentConfig& config);

KnnBackend parse_backend(const std::string& token);

}  // namespace advpol
