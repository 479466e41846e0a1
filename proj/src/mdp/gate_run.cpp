#include "advpol/mdp/gate_run.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {
namespace {

// Scales a 2-D action so its Euclidean norm is at most 1.
std::array<double, 2> unit_bounded(std::span<const double> a) {
  const double n = std::hypot(a[0], a[1]);
  if (n <= 1.0) return {a[0], a[1]};
  return {a[0] / n, a[1] / n};
}

}  // namespace

GateRun::GateRun(GateRunParams params) : params_(params), clock_(params.horizon) {
  if (params_.horizon < 1) throw std::invalid_argument("gate_run: horizon must be positive");
  if (!(params_.collision_radius > 0.0)) throw std::invalid_argument("gate_run: collision_radius must be positive");
}

std::vector<double> GateRun::reset(std::uint64_t seed) {
  auto rng = make_rng(seed, 0x67617465);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  state_[0] = params_.runner_start_x;
  state_[1] = params_.runner_start_y_spread * unit(rng);
  state_[2] = params_.blocker_start_x + params_.blocker_start_x_jitter * unit(rng);
  state_[3] = params_.blocker_start_y_spread * unit(rng);
  clock_.start();
  return joint();
}

void GateRun::place(const std::array<double, 4>& joint_state) {
  state_ = joint_state;
  clock_.start();
}

std::vector<double> GateRun::reference_initial_state() const {
  return {params_.runner_start_x, 0.0, params_.blocker_start_x, 0.0};
}

StepResult GateRun::step(std::span<const double> victim_action, std::span<const double> adversary_action) {
  const auto va = unit_bounded(victim_action_spec().clip(victim_action));
  const auto aa = unit_bounded(adversary_action_spec().clip(adversary_action));
  clock_.tick();

  const double gap = std::hypot(state_[0] - state_[2], state_[1] - state_[3]);
  const bool blocked = gap < params_.collision_radius;
  if (!blocked) {
    state_[0] += params_.runner_speed * va[0];
    state_[1] += params_.runner_speed * va[1];
  }
  state_[2] += params_.blocker_speed * aa[0];
  state_[3] += params_.blocker_speed * aa[1];
  for (int i : {0, 2}) state_[i] = std::clamp(state_[i], -params_.arena_x, params_.arena_x);
  for (int i : {1, 3}) state_[i] = std::clamp(state_[i], -params_.arena_y, params_.arena_y);

  StepResult r;
  r.state = joint();
  r.success = state_[0] >= params_.finish_x;
  r.reward = r.success ? 1.0 : 0.0;
  r.terminal = r.success;
  r.truncated = clock_.finish_step(r.terminal);
  return r;
}

std::unique_ptr<TwoPlayerEnvironment> GateRun::clone() const { return std::make_unique<GateRun>(*this); }

}  // namespace advpol
