#include "advpol/mdp/point_goal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {

PointGoal::PointGoal(PointGoalParams params) : params_(params), clock_(params.horizon) {
  if (params_.horizon < 1) throw std::invalid_argument("point_goal: horizon must be positive");
  if (!(params_.step_size > 0.0)) throw std::invalid_argument("point_goal: step_size must be positive");
  if (!(params_.goal_tolerance > 0.0)) throw std::invalid_argument("point_goal: goal_tolerance must be positive");
}

std::vector<double> PointGoal::reset(std::uint64_t seed) {
  auto rng = make_rng(seed, 0x706f696e74);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  pos_[0] = params_.start_x + params_.start_x_jitter * unit(rng);
  pos_[1] = params_.start_y_spread * unit(rng);
  clock_.start();
  return {pos_[0], pos_[1]};
}

void PointGoal::place(double x, double y) {
  pos_ = {std::clamp(x, -1.0, 1.0), std::clamp(y, -1.0, 1.0)};
  clock_.start();
}

bool PointGoal::in_goal(double x, double y) const {
  return std::abs(x - params_.goal_x) <= params_.goal_tolerance &&
         std::abs(y - params_.goal_y) <= params_.goal_tolerance;
}

StepResult PointGoal::step(std::span<const double> action) {
  const auto a = action_spec().clip(action);
  clock_.tick();
  const double x0 = pos_[0], y0 = pos_[1];
  double x1 = std::clamp(x0 + params_.step_size * a[0], -1.0, 1.0);
  const double y1 = std::clamp(y0 + params_.step_size * a[1], -1.0, 1.0);

  // Crossing x = 0 outside the doorway leaves x where it was.
  const bool crosses = (x0 < 0.0 && x1 >= 0.0) || (x0 >= 0.0 && x1 < 0.0);
  if (crosses && params_.door_half_width < 1.0) {
    const double frac = (0.0 - x0) / (x1 - x0);
    const double y_cross = y0 + frac * (y1 - y0);
    if (std::abs(y_cross) >= params_.door_half_width) x1 = x0;
  }
  pos_ = {x1, y1};

  StepResult r;
  r.state = {x1, y1};
  r.success = in_goal(x1, y1);
  if (params_.dense) {
    const double before = std::hypot(x0 - params_.goal_x, y0 - params_.goal_y);
    const double after = std::hypot(x1 - params_.goal_x, y1 - params_.goal_y);
    r.reward = (before - after) + (r.success ? 1.0 : 0.0);
  } else {
    r.reward = r.success ? 1.0 : 0.0;
  }
  r.terminal = r.success;
  r.truncated = clock_.finish_step(r.terminal);
  return r;
}

std::unique_ptr<Environment> PointGoal::clone() const { return std::make_unique<PointGoal>(*this); }

}  // namespace advpol
