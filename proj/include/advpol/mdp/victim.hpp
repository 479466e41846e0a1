#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advpol/approximator/policy.hpp"
#include "advpol/mdp/environment.hpp"

namespace advpol {

/// A frozen, deterministic victim. `act` never mutates the victim.
class VictimPolicy {
 public:
  virtual ~VictimPolicy() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual std::vector<double> act(std::span<const double> observation) const = 0;
  /// Hash of everything that determines behaviour.
  virtual std::uint64_t checksum() const = 0;
  bool frozen() const { return true; }
};

/// Acts on the mode of a trained policy (mean action, or arg-max index).
class NetworkVictim final : public VictimPolicy {
 public:
  explicit NetworkVictim(PolicyHandle policy) : policy_(std::move(policy)) {}
  std::string kind() const override { return "network"; }
  std::size_t observation_dim() const override { return policy_.input_dim(); }
  std::vector<double> act(std::span<const double> observation) const override;
  std::uint64_t checksum() const override;
  const PolicyHandle& policy() const { return policy_; }

 private:
  PolicyHandle policy_;
};

/// PointGoal victim that heads straight for the goal at full speed.
class GreedyPointVictim final : public VictimPolicy {
 public:
  GreedyPointVictim(double goal_x, double goal_y) : goal_{goal_x, goal_y} {}
  std::string kind() const override { return "greedy_point"; }
  std::size_t observation_dim() const override { return 2; }
  std::vector<double> act(std::span<const double> observation) const override;
  std::uint64_t checksum() const override;

 private:
  std::array<double, 2> goal_;
};

/// GateRun runner: runs along +x; when `avoid` is set and the blocker sits in
/// a corridor just ahead, it sidesteps away from the blocker.
class ScriptedGateRunner final : public VictimPolicy {
 public:
  explicit ScriptedGateRunner(bool avoid = true) : avoid_(avoid) {}
  std::string kind() const override { return avoid_ ? "scripted_runner" : "naive_runner"; }
  std::size_t observation_dim() const override { return 4; }
  std::vector<double> act(std::span<const double> observation) const override;
  std::uint64_t checksum() const override;

  static constexpr double kLookahead = 0.4;
  static constexpr double kCorridor = 0.2;

 private:
  bool avoid_;
};

/// FNV-1a over the bytes of a double sequence.
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace advpol
