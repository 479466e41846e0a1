#pragma once

#include <filesystem>
#include <json.hpp>

#include "advpol/approximator/policy.hpp"

namespace advpol {

inline constexpr int kCheckpointFormatVersion = 1;

/// JSON container: format_version, head_kind, input_dim, output_dim, hidden,
/// optional "meta" object, and the named segments with shape and values.
nlohmann::json policy_to_json(const PolicyHandle& policy, const nlohmann::json& meta = nlohmann::json::object());
PolicyHandle policy_from_json(const nlohmann::json& doc);

void save_policy(const std::filesystem::path& path, const PolicyHandle& policy,
                 const nlohmann::json& meta = nlohmann::json::object());
PolicyHandle load_policy(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

}  // namespace advpol
