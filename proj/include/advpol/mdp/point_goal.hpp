#pragma once

#include <array>

#include "advpol/mdp/environment.hpp"

namespace advpol {

struct PointGoalParams {
  int horizon = 100;
  bool dense = false;               // pay per-step progress toward the goal
  double step_size = 0.05;          // displacement per unit action coordinate
  double goal_x = 0.75, goal_y = 0.0;
  double goal_tolerance = 0.1;      // l-inf half-width of the success box
  double start_x = -0.75;
  double start_x_jitter = 0.05;
  double start_y_spread = 0.3;      // start y ~ U(-spread, spread)
  double door_half_width = 0.04;    // wall at x = 0 with a doorway |y| < this; >= 1 disables the wall
};

/// Continuous 2-D navigation in [-1,1]^2. The state is the position; the
/// action is a velocity in [-1,1]^2 scaled by `step_size`. A wall along x = 0
/// is passable only through a doorway centred on y = 0. Success fires when
/// the position is within `goal_tolerance` (l-inf) of the goal.
class PointGoal final : public Environment {
 public:
  explicit PointGoal(PointGoalParams params = {});

  std::string name() const override { return params_.dense ? "point_goal_dense" : "point_goal"; }
  std::size_t state_dim() const override { return 2; }
  ActionSpec action_spec() const override { return ActionSpec::box(2, 1.0); }
  int horizon() const override { return params_.horizon; }

  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::vector<double> reference_initial_state() const override { return {params_.start_x, 0.0}; }
  std::unique_ptr<Environment> clone() const override;

  const PointGoalParams& params() const { return params_; }
  bool in_goal(double x, double y) const;
  /// Places the agent at an arbitrary position and starts a fresh episode.
  void place(double x, double y);

 private:
  PointGoalParams params_;
  EpisodeClock clock_;
  std::array<double, 2> pos_{};
};

}  // namespace advpol
