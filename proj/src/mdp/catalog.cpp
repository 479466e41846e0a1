#include "advpol/mdp/catalog.hpp"

#include <set>
#include <stdexcept>

#include "advpol/mdp/gate_run.hpp"
#include "advpol/mdp/grid_chain.hpp"
#include "advpol/mdp/point_goal.hpp"

namespace advpol {
namespace {

using nlohmann::json;

// Reads optional keys from a params object and rejects anything it did not read.
class ParamReader {
 public:
  ParamReader(const json& params, std::string env) : params_(params), env_(std::move(env)) {
    if (!params_.is_null() && !params_.is_object()) {
      throw std::invalid_argument("environment params for " + env_ + " must be an object");
    }
  }

  template <typename T>
  void read(const char* key, T& value) {
    seen_.insert(key);
    if (params_.is_null() || !params_.contains(key)) return;
    try {
      value = params_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("env.params." + std::string(key) + ": wrong type");
    }
  }

  void finish() const {
    if (params_.is_null()) return;
    for (const auto& [key, _] : params_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument("env.params." + key + ": unknown key for " + env_);
    }
  }

 private:
  const json& params_;
  std::string env_;
  std::set<std::string> seen_;
};

std::unique_ptr<Environment> make_point_goal(const json& params, bool dense) {
  PointGoalParams p;
  p.dense = dense;
  ParamReader r(params, dense ? "point_goal_dense" : "point_goal");
  r.read("horizon", p.horizon);
  r.read("step_size", p.step_size);
  r.read("goal_x", p.goal_x);
  r.read("goal_y", p.goal_y);
  r.read("goal_tolerance", p.goal_tolerance);
  r.read("start_x", p.start_x);
  r.read("start_x_jitter", p.start_x_jitter);
  r.read("start_y_spread", p.start_y_spread);
  r.read("door_half_width", p.door_half_width);
  r.finish();
  return std::make_unique<PointGoal>(p);
}

std::vector<EnvironmentEntry> make_catalog() {
  std::vector<EnvironmentEntry> out;
  out.push_back({"grid_chain", false,
                 [](const json& params) -> std::unique_ptr<Environment> {
                   GridChainParams p;
                   ParamReader r(params, "grid_chain");
                   r.read("length", p.length);
                   r.read("slip", p.slip);
                   r.read("horizon", p.horizon);
                   r.finish();
                   return std::make_unique<GridChain>(p);
                 },
                 nullptr});
  out.push_back({"point_goal", false, [](const json& params) { return make_point_goal(params, false); }, nullptr});
  out.push_back({"point_goal_dense", false, [](const json& params) { return make_point_goal(params, true); }, nullptr});
  out.push_back({"gate_run", true, nullptr, [](const json& params) -> std::unique_ptr<TwoPlayerEnvironment> {
                   GateRunParams p;
                   ParamReader r(params, "gate_run");
                   r.read("horizon", p.horizon);
                   r.read("runner_speed", p.runner_speed);
                   r.read("blocker_speed", p.blocker_speed);
                   r.read("collision_radius", p.collision_radius);
                   r.read("finish_x", p.finish_x);
                   r.read("runner_start_x", p.runner_start_x);
                   r.read("runner_start_y_spread", p.runner_start_y_spread);
                   r.read("blocker_start_x", p.blocker_start_x);
                   r.read("blocker_start_x_jitter", p.blocker_start_x_jitter);
                   r.read("blocker_start_y_spread", p.blocker_start_y_spread);
                   r.read("arena_x", p.arena_x);
                   r.read("arena_y", p.arena_y);
                   r.finish();
                   return std::make_unique<GateRun>(p);
                 }});
  return out;
}

}  // namespace

const std::vector<EnvironmentEntry>& built_in_environments() {
  static const std::vector<EnvironmentEntry> catalog = make_catalog();
  return catalog;
}

const EnvironmentEntry& find_environment(const std::string& name) {
  for (const auto& e : built_in_environments()) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace advpol
