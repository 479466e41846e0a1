#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advpol/harness/config.hpp"
#include "advpol/mdp/threat_models.hpp"
#include "advpol/mdp/victim.hpp"

namespace advpol {

/// RNG streams of a training run: collector i uses kCollectorStreamBase + i,
/// minibatch shuffling uses kShuffleStream.
inline constexpr std::uint64_t kCollectorStreamBase = 0x1000;
inline constexpr std::uint64_t kShuffleStream = 0x70706f;

/// Resolves the victim named by the config: a checkpoint path or a scripted victim.
std::shared_ptr<const VictimPolicy> load_victim(const ExperimentConfig& config);

/// The adversary's decision process for the configured threat model.
std::unique_ptr<LearnerMdp> make_attack_mdp(const ExperimentConfig& config,
                                            std::shared_ptr<const VictimPolicy> victim);

/// The seeded initial learner policy: Gaussian head for continuous actions,
/// categorical for discrete ones.
PolicyHandle initial_learner_policy(const LearnerMdp& mdp, std::size_t hidden, double log_std, std::uint64_t seed);

/// Produces the adversary's action for a state.
using ActionSource = std::function<std::vector<double>(std::span<const double> state, Rng& rng)>;

ActionSource policy_actions(const PolicyHandle& policy, bool deterministic);
/// Uniform over the action box (the l-inf ball for perturbations).
ActionSource random_actions(const ActionSpec& spec);
/// All-zero actions: no perturbation, or an idle opponent.
ActionSource noop_actions(const ActionSpec& spec);

struct EvalResult {
  int episodes = 0;
  int victim_failures = 0;
  double victim_mean_reward = 0.0;  // true per-episode task reward of the victim
  double victim_std_reward = 0.0;
  double mean_adversary_return = 0.0;
  double failure_fraction = 0.0;
  double asr = 0.0;  // sparse: 1 + mean adversary return; dense mode: failure fraction
};

/// Runs `episodes` seeded episodes of `mdp` with actions from `source`.
EvalResult evaluate(LearnerMdp& mdp, const ActionSource& source, int episodes, std::uint64_t seed,
                    bool dense_reward = false);

EvalResult random_attack_baseline(const ExperimentConfig& config, std::shared_ptr<const VictimPolicy> victim,
                                  int episodes, std::uint64_t seed);

struct IterationRecord {
  int iteration = 0;
  std::uint64_t samples = 0;
  double mean_ext_return = 0.0;  // J^AP estimate over episodes finished in the batch (NaN if none)
  double mean_int_return = 0.0;  // mean intrinsic return of episodes finished in the batch (NaN if none)
  std::optional<double> asr_eval;
  double tau = 1.0;
  double lagrange_multiplier = 0.0;
  double entropy_proxy = 0.0;
  std::optional<double> wall_seconds;
  PpoStats ppo;
  int episodes = 0;
};

struct AttackReport {
  std::string regularizer;
  bool br_enabled = false;
  std::vector<IterationRecord> iterations;
  std::optional<EvalResult> final_eval;
  std::uint64_t victim_checksum_before = 0;
  std::uint64_t victim_checksum_after = 0;
  std::uint64_t samples = 0;
  std::size_t buffer_size = 0;
  PolicyHandle adversary;
  std::string error;  // non-empty if the run aborted; the rest is the partial report
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Algorithm loop: sample, grow the union buffer, compute intrinsic bonuses,
/// estimate advantages, update the adversary and the temperature, repeat
/// until the sample budget is spent; then evaluate. Module errors abort the
/// loop and are reported in `error` with the partial report.
AttackReport run_attack(const ExperimentConfig& config, std::shared_ptr<const VictimPolicy> victim,
                        const IterationCallback& on_iteration = nullptr);

struct VictimTrainReport {
  PolicyHandle policy;
  std::uint64_t samples = 0;
  int iterations = 0;
  double success_rate = 0.0;  // on the sparse task, unattacked
  int eval_episodes = 0;
  bool any_training_success = false;
  std::string warning;
};

/// PPO-trains a victim on the (dense) task and evaluates its success rate on
/// the configured environment without attack.
VictimTrainReport train_victim(const ExperimentConfig& config, const IterationCallback& on_iteration = nullptr);

/// Name of the environment used for victim training.
std::string victim_training_env(const ExperimentConfig& config);

}  // namespace advpol
