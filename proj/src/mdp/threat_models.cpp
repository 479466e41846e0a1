#include "advpol/mdp/threat_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {
namespace {

Transition from_step(std::vector<double> state, std::span<const double> action, std::vector<double> applied,
                     const StepResult& r) {
  Transition t;
  t.state = std::move(state);
  t.action.assign(action.begin(), action.end());
  t.applied_action = std::move(applied);
  t.task_reward = r.reward;
  t.next_state = r.state;
  t.terminal = r.terminal;
  t.truncated = r.truncated;
  t.victim_succeeded = r.success;
  return t;
}

}  // namespace

std::vector<double> TaskMdp::reset(std::uint64_t seed) {
  state_ = env_->reset(seed);
  return state_;
}

Transition TaskMdp::step(std::span<const double> action) {
  auto applied = env_->action_spec().clip(action);
  const StepResult r = env_->step(applied);
  Transition t = from_step(state_, action, std::move(applied), r);
  t.ext_reward = r.reward;
  state_ = r.state;
  return t;
}

PerturbationMdp::PerturbationMdp(std::unique_ptr<Environment> env, std::shared_ptr<const VictimPolicy> victim,
                                 double epsilon, bool dense_reward)
    : env_(std::move(env)), victim_(std::move(victim)), epsilon_(epsilon), dense_reward_(dense_reward) {
  if (!(epsilon_ >= 0.0)) throw std::invalid_argument("perturbation budget must be non-negative");
  if (victim_ == nullptr) throw std::invalid_argument("perturbation threat model needs a victim");
  if (victim_->observation_dim() != env_->state_dim()) {
    throw std::invalid_argument("victim observation size " + std::to_string(victim_->observation_dim()) +
                                " does not match environment state size " + std::to_string(env_->state_dim()));
  }
}

std::vector<double> PerturbationMdp::reset(std::uint64_t seed) {
  state_ = env_->reset(seed);
  return state_;
}

Transition PerturbationMdp::step(std::span<const double> perturbation) {
  if (perturbation.size() != state_.size()) throw std::invalid_argument("perturbation has the wrong size");
  std::vector<double> delta(perturbation.size());
  std::vector<double> observed(state_.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (!std::isfinite(perturbation[i])) throw std::invalid_argument("perturbation is not finite");
    delta[i] = std::clamp(perturbation[i], -epsilon_, epsilon_);
    observed[i] = state_[i] + delta[i];
  }
  const StepResult r = env_->step(victim_->act(observed));
  Transition t = from_step(state_, perturbation, std::move(delta), r);
  t.ext_reward = dense_reward_ ? -r.reward : (r.success ? -1.0 : 0.0);
  state_ = r.state;
  return t;
}

std::unique_ptr<LearnerMdp> PerturbationMdp::clone() const {
  return std::make_unique<PerturbationMdp>(env_->clone(), victim_, epsilon_, dense_reward_);
}

FixedVictimMdp::FixedVictimMdp(std::unique_ptr<TwoPlayerEnvironment> env, std::shared_ptr<const VictimPolicy> victim)
    : env_(std::move(env)), victim_(std::move(victim)) {
  if (victim_ == nullptr) throw std::invalid_argument("fixed-victim threat model needs a victim");
  if (victim_->observation_dim() != env_->state_dim()) {
    throw std::invalid_argument("victim observation size does not match the joint state");
  }
  auto v = env_->victim_coordinates();
  auto a = env_->adversary_coordinates();
  std::vector<int> seen(env_->state_dim(), 0);
  for (auto i : v) ++seen.at(i);
  for (auto i : a) ++seen.at(i);
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw std::invalid_argument("victim and adversary coordinates must partition the joint state");
  }
}

std::vector<double> FixedVictimMdp::reset(std::uint64_t seed) {
  state_ = env_->reset(seed);
  return state_;
}

Transition FixedVictimMdp::step(std::span<const double> action) {
  auto applied = env_->adversary_action_spec().clip(action);
  const StepResult r = env_->step(victim_->act(state_), applied);
  Transition t = from_step(state_, action, std::move(applied), r);
  t.ext_reward = r.success ? -1.0 : 0.0;
  state_ = r.state;
  return t;
}

std::vector<double> FixedVictimMdp::victim_reference_state() const {
  return project(env_->reference_initial_state(), env_->victim_coordinates());
}

std::unique_ptr<LearnerMdp> FixedVictimMdp::clone() const {
  return std::make_unique<FixedVictimMdp>(env_->clone(), victim_);
}

}  // namespace advpol
