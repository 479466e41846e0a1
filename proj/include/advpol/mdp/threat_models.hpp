#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advpol/mdp/environment.hpp"
#include "advpol/mdp/victim.hpp"

namespace advpol {

/// One learner step. For adversaries `ext_reward` is the negated victim
/// success indicator (or the negated dense reward in dense attack mode); for
/// victim training it is the task reward.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;          // as sampled by the learner
  std::vector<double> applied_action;  // after clamping to the action set
  double ext_reward = 0.0;
  double task_reward = 0.0;            // the victim's true per-step reward
  std::vector<double> next_state;
  bool terminal = false;
  bool truncated = false;
  double log_prob = 0.0;
  bool victim_succeeded = false;
};

/// The single-agent decision process seen by whoever is learning.
class LearnerMdp {
 public:
  virtual ~LearnerMdp() = default;
  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual ActionSpec action_spec() const = 0;
  virtual int horizon() const = 0;
  virtual double discount() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual Transition step(std::span<const double> action) = 0;

  virtual bool multi_agent() const { return false; }
  /// Coordinates of the learner state that form the victim's state space.
  virtual Projection victim_projection() const { return identity_projection(state_dim()); }
  /// Coordinates that form the adversary's own state space.
  virtual Projection adversary_projection() const { return identity_projection(state_dim()); }
  /// Default risk target, expressed in victim coordinates.
  virtual std::vector<double> victim_reference_state() const = 0;
  virtual std::unique_ptr<LearnerMdp> clone() const = 0;
};

/// The unattacked task, for training victims.
class TaskMdp final : public LearnerMdp {
 public:
  explicit TaskMdp(std::unique_ptr<Environment> env) : env_(std::move(env)) {}
  std::string name() const override { return env_->name(); }
  std::size_t state_dim() const override { return env_->state_dim(); }
  ActionSpec action_spec() const override { return env_->action_spec(); }
  int horizon() const override { return env_->horizon(); }
  double discount() const override { return env_->discount(); }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::span<const double> action) override;
  std::vector<double> victim_reference_state() const override { return env_->reference_initial_state(); }
  std::unique_ptr<LearnerMdp> clone() const override { return std::make_unique<TaskMdp>(env_->clone()); }

 private:
  std::unique_ptr<Environment> env_;
  std::vector<double> state_;
};

/// Observation-perturbation threat model: the adversary observes the victim's
/// true state and adds a perturbation clamped to the l-inf ball of radius
/// `epsilon`; the victim acts on the perturbed observation.
class PerturbationMdp final : public LearnerMdp {
 public:
  PerturbationMdp(std::unique_ptr<Environment> env, std::shared_ptr<const VictimPolicy> victim, double epsilon,
                  bool dense_reward = false);
  std::string name() const override { return env_->name() + "/perturbation"; }
  std::size_t state_dim() const override { return env_->state_dim(); }
  ActionSpec action_spec() const override { return ActionSpec::box(env_->state_dim(), epsilon_); }
  int horizon() const override { return env_->horizon(); }
  double discount() const override { return env_->discount(); }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::span<const double> perturbation) override;
  std::vector<double> victim_reference_state() const override { return env_->reference_initial_state(); }
  std::unique_ptr<LearnerMdp> clone() const override;

  double epsilon() const { return epsilon_; }
  const VictimPolicy& victim() const { return *victim_; }
  Environment& inner() { return *env_; }

 private:
  std::unique_ptr<Environment> env_;
  std::shared_ptr<const VictimPolicy> victim_;
  double epsilon_;
  bool dense_reward_;
  std::vector<double> state_;
};

/// Two-player threat model reduced to a single-agent process for the
/// adversary by fixing the victim's policy.
class FixedVictimMdp final : public LearnerMdp {
 public:
  FixedVictimMdp(std::unique_ptr<TwoPlayerEnvironment> env, std::shared_ptr<const VictimPolicy> victim);
  std::string name() const override { return env_->name() + "/fixed_victim"; }
  std::size_t state_dim() const override { return env_->state_dim(); }
  ActionSpec action_spec() const override { return env_->adversary_action_spec(); }
  int horizon() const override { return env_->horizon(); }
  double discount() const override { return env_->discount(); }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::span<const double> action) override;
  bool multi_agent() const override { return true; }
  Projection victim_projection() const override { return env_->victim_coordinates(); }
  Projection adversary_projection() const override { return env_->adversary_coordinates(); }
  std::vector<double> victim_reference_state() const override;
  std::unique_ptr<LearnerMdp> clone() const override;

  const VictimPolicy& victim() const { return *victim_; }
  TwoPlayerEnvironment& inner() { return *env_; }

 private:
  std::unique_ptr<TwoPlayerEnvironment> env_;
  std::shared_ptr<const VictimPolicy> victim_;
  std::vector<double> state_;
};

}  // namespace advpol
