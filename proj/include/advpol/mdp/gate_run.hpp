#pragma once

#include <array>

#include "advpol/mdp/environment.hpp"

namespace advpol {

struct GateRunParams {
  int horizon = 60;
  double runner_speed = 0.05;
  double blocker_speed = 0.06;
  double collision_radius = 0.15;
  double finish_x = 1.0;
  double runner_start_x = -1.0;
  double runner_start_y_spread = 0.5;
  double blocker_start_x = 0.2;
  double blocker_start_x_jitter = 0.2;
  double blocker_start_y_spread = 0.5;
  double arena_x = 1.5, arena_y = 1.0;  // positions are clamped to |x| <= arena_x, |y| <= arena_y
};

/// Two-player gate race. Joint state = [runner x, runner y, blocker x,
/// blocker y]. The runner (victim) wins by reaching x >= finish_x within the
/// horizon. While the blocker is within `collision_radius` of the runner at
/// the start of a step, the runner does not move that step.
class GateRun final : public TwoPlayerEnvironment {
 public:
  explicit GateRun(GateRunParams params = {});

  std::string name() const override { return "gate_run"; }
  std::size_t state_dim() const override { return 4; }
  Projection victim_coordinates() const override { return {0, 1}; }
  Projection adversary_coordinates() const override { return {2, 3}; }
  ActionSpec victim_action_spec() const override { return ActionSpec::box(2, 1.0); }
  ActionSpec adversary_action_spec() const override { return ActionSpec::box(2, 1.0); }
  int horizon() const override { return params_.horizon; }

  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> victim_action, std::span<const double> adversary_action) override;
  std::vector<double> reference_initial_state() const override;
  std::unique_ptr<TwoPlayerEnvironment> clone() const override;

  const GateRunParams& params() const { return params_; }
  /// Sets the joint state directly and starts a fresh episode.
  void place(const std::array<double, 4>& joint);

 private:
  std::vector<double> joint() const { return {state_.begin(), state_.end()}; }

  GateRunParams params_;
  EpisodeClock clock_;
  std::array<double, 4> state_{};
};

}  // namespace advpol
