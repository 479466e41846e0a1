#include "advpol/ppo/rollout.hpp"

#include <stdexcept>

namespace advpol {

void RolloutBatch::append(const RolloutBatch& other) {
  const std::size_t offset = size();
  states.append_rows(other.states);
  actions.append_rows(other.actions);
  applied_actions.append_rows(other.applied_actions);
  log_probs.insert(log_probs.end(), other.log_probs.begin(), other.log_probs.end());
  ext_rewards.insert(ext_rewards.end(), other.ext_rewards.begin(), other.ext_rewards.end());
  int_rewards.insert(int_rewards.end(), other.int_rewards.begin(), other.int_rewards.end());
  victim_succeeded.insert(victim_succeeded.end(), other.victim_succeeded.begin(), other.victim_succeeded.end());
  for (Segment s : other.segments) {
    s.begin += offset;
    s.end += offset;
    segments.push_back(s);
  }
  bootstrap_states.append_rows(other.bootstrap_states);
  episodes.insert(episodes.end(), other.episodes.begin(), other.episodes.end());
}

RolloutCollector::RolloutCollector(std::unique_ptr<LearnerMdp> mdp, std::uint64_t seed, std::uint64_t stream)
    : mdp_(std::move(mdp)), action_rng_(make_rng(seed, 2 * stream)), episode_rng_(make_rng(seed, 2 * stream + 1)) {
  if (mdp_ == nullptr) throw std::invalid_argument("collector needs a process");
}

void RolloutCollector::begin_episode() {
  state_ = mdp_->reset(episode_rng_());
  in_episode_ = true;
  running_ = EpisodeSummary{};
}

RolloutBatch RolloutCollector::collect(const PolicyHandle& policy, std::size_t steps, bool deterministic) {
  if (policy.input_dim() != mdp_->state_dim()) {
    throw std::invalid_argument("policy input size does not match the process state size");
  }
  RolloutBatch b;
  b.int_rewards.assign(steps, 0.0);
  std::size_t seg_begin = 0;
  bool continues = in_episode_;
  for (std::size_t t = 0; t < steps; ++t) {
    if (!in_episode_) begin_episode();
    const ActionDistribution dist = policy.distribution(state_);
    const std::vector<double> action = deterministic ? dist.mode() : dist.sample(action_rng_);
    Transition tr = mdp_->step(action);
    b.states.append(tr.state);
    b.actions.append(tr.action);
    b.applied_actions.append(tr.applied_action);
    b.log_probs.push_back(dist.log_prob(action));
    b.ext_rewards.push_back(tr.ext_reward);
    b.victim_succeeded.push_back(tr.victim_succeeded ? 1 : 0);
    ++steps_taken_;

    running_.ext_return += tr.ext_reward;
    running_.task_return += tr.task_reward;
    running_.victim_succeeded = running_.victim_succeeded || tr.victim_succeeded;
    ++running_.length;

    const bool done = tr.terminal || tr.truncated;
    if (done || t + 1 == steps) {
      b.segments.push_back({seg_begin, t + 1, tr.terminal, done, continues, 0});
      continues = false;
      b.bootstrap_states.append(tr.next_state);
      seg_begin = t + 1;
    }
    if (done) {
      b.episodes.push_back(running_);
      in_episode_ = false;
    } else {
      state_ = std::move(tr.next_state);
    }
  }
  return b;
}

RolloutBatch collect_parallel(std::vector<RolloutCollector>& collectors, const PolicyHandle& policy,
                              std::size_t steps) {
  if (collectors.empty()) throw std::invalid_argument("no collectors");
  const std::size_t k = collectors.size();
  std::vector<RolloutBatch> parts(k);
#pragma omp parallel for schedule(static, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(k); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const std::size_t share = steps / k + (u < steps % k ? 1 : 0);
    parts[u] = collectors[u].collect(policy, share);
    for (auto& s : parts[u].segments) s.source = static_cast<std::uint32_t>(u);
  }
  RolloutBatch out = std::move(parts[0]);
  for (std::size_t i = 1; i < k; ++i) out.append(parts[i]);
  return out;
}

}  // namespace advpol
