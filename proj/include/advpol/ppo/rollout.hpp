#pragma once

#include <memory>
#include <vector>

#include "advpol/approximator/policy.hpp"
#include "advpol/mdp/threat_models.hpp"

namespace advpol {

/// A contiguous run of steps from one episode inside a batch. A segment ends
/// at an environment terminal, at the horizon, or where the batch was cut.
struct Segment {
  std::size_t begin = 0, end = 0;  // [begin, end) into the batch
  bool terminal = false;
  bool ends_episode = false;  // terminal or truncated (not a batch cut)
  bool continues = false;     // continues an episode begun in an earlier batch
  std::uint32_t source = 0;   // collector index
};

struct EpisodeSummary {
  double ext_return = 0.0;   // adversary (or learner) extrinsic return
  double task_return = 0.0;  // victim's true reward summed over the episode
  bool victim_succeeded = false;
  int length = 0;
};

/// On-policy transitions in collection order plus everything GAE needs.
struct RolloutBatch {
  StateMatrix states, actions, applied_actions;
  std::vector<double> log_probs, ext_rewards, int_rewards;
  std::vector<std::uint8_t> victim_succeeded;
  std::vector<Segment> segments;
  StateMatrix bootstrap_states;  // one row per segment: the state after its last step
  std::vector<EpisodeSummary> episodes;  // episodes that finished inside this batch

  // Filled by prepare_advantages.
  std::vector<double> v_ext, v_int;                  // per step
  std::vector<double> bootstrap_v_ext, bootstrap_v_int;  // per segment
  std::vector<double> adv_ext, adv_int, ret_ext, ret_int;

  std::size_t size() const { return log_probs.size(); }
  /// Appends another batch; its segments and episodes are re-indexed.
  void append(const RolloutBatch& other);
};

/// Steps one learner process with a policy, carrying unfinished episodes
/// across calls. Owns a private RNG stream for actions and episode seeds.
class RolloutCollector {
 public:
  RolloutCollector(std::unique_ptr<LearnerMdp> mdp, std::uint64_t seed, std::uint64_t stream);

  RolloutBatch collect(const PolicyHandle& policy, std::size_t steps, bool deterministic = false);

  LearnerMdp& mdp() { return *mdp_; }
  std::uint64_t steps_taken() const { return steps_taken_; }

 private:
  void begin_episode();

  std::unique_ptr<LearnerMdp> mdp_;
  Rng action_rng_, episode_rng_;
  std::vector<double> state_;
  bool in_episode_ = false;
  EpisodeSummary running_;
  std::uint64_t steps_taken_ = 0;
};

/// Splits `steps` across collectors (remainder to the lowest indices), runs
/// them concurrently, and concatenates in collector-index order.
RolloutBatch collect_parallel(std::vector<RolloutCollector>& collectors, const PolicyHandle& policy,
                              std::size_t steps);

}  // namespace advpol
