#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "advpol/bias_reduction/br_controller.hpp"
#include "advpol/density/knn.hpp"
#include "advpol/ppo/ppo.hpp"
#include "advpol/regularizers/regularizers.hpp"

namespace advpol {

enum class ThreatModelKind { kPerturbation, kFixedVictim };

struct EnvConfig {
  std::string name = "point_goal";
  nlohmann::json params = nlohmann::json::object();
};

struct ThreatModelConfig {
  ThreatModelKind kind = ThreatModelKind::kPerturbation;
  double epsilon = 0.05;      // l-inf budget (perturbation model)
  bool dense_reward = false;  // adversary reward = negated dense reward (comparison mode)
};

struct VictimConfig {
  /// Checkpoint path, or one of the scripted victims: "scripted_runner",
  /// "naive_runner", "greedy_point".
  std::string path;
  std::string train_env;  // empty: the dense variant of env.name if one exists, else env.name
  std::uint64_t train_steps = 500000;
  int eval_episodes = 100;
};

struct DensityConfig {
  std::size_t capacity = 0;
  bool normalize = true;
  KnnBackend backend = KnnBackend::kKdTree;
  std::size_t entropy_queries = 2048;  // 0 = every stored state
};

struct RunConfig {
  std::uint64_t total_steps = 1000000;
  int eval_episodes = 300;
  int eval_every = 0;  // iterations between in-training evaluations; 0 = final only
  bool eval_deterministic = false;
  std::uint64_t seed = 0;
  int collectors = 1;
  bool record_wall_clock = false;
  std::size_t hidden = 64;
};

struct ExperimentConfig {
  EnvConfig env;
  ThreatModelConfig threat;
  VictimConfig victim;
  RegularizerSpec regularizer;
  MimicConfig mimic;
  bool intrinsic_episodic = false;
  PpoConfig ppo;
  BrConfig br;
  DensityConfig density;
  RunConfig run;

  /// Throws std::invalid_argument naming the offending key path.
  void validate() const;
};

std::string threat_model_name(ThreatModelKind kind);

}  // namespace advpol
