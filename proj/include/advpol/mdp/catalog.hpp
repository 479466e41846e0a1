#pragma once

#include <functional>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "advpol/mdp/environment.hpp"

namespace advpol {

/// Constructor for a built-in environment. `params` is a JSON object whose
/// keys override the environment's parameter defaults; unknown keys throw.
struct EnvironmentEntry {
  std::string name;
  bool two_player = false;
  std::function<std::unique_ptr<Environment>(const nlohmann::json& params)> make_single;
  std::function<std::unique_ptr<TwoPlayerEnvironment>(const nlohmann::json& params)> make_two_player;
};

/// grid_chain, point_goal, point_goal_dense, gate_run.
const std::vector<EnvironmentEntry>& built_in_environments();

/// Throws std::invalid_argument naming the unknown environment.
const EnvironmentEntry& find_environment(const std::string& name);

}  // namespace advpol
