#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advpol/common.hpp"

namespace advpol {

/// Shape of an action space. Discrete actions travel as a one-element vector
/// holding the index.
struct ActionSpec {
  enum class Kind { kContinuous, kDiscrete };

  Kind kind = Kind::kContinuous;
  std::size_t dim = 0;           // continuous: number of coordinates
  std::vector<double> low, high;  // continuous: per-coordinate bounds
  std::size_t cardinality = 0;    // discrete: number of actions

  static ActionSpec continuous(std::vector<double> low, std::vector<double> high);
  static ActionSpec box(std::size_t dim, double bound);
  static ActionSpec discrete(std::size_t n);

  bool is_discrete() const { return kind == Kind::kDiscrete; }
  /// Width of the action vector carried through transitions.
  std::size_t width() const { return is_discrete() ? 1 : dim; }
  /// Number of outputs a policy head needs for this space.
  std::size_t head_outputs() const { return is_discrete() ? cardinality : dim; }

  /// Clamps a continuous action into the box; validates a discrete index.
  std::vector<double> clip(std::span<const double> action) const;
};

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;  // task reward of the acting (or victim) agent
  bool success = false;
  bool terminal = false;
  bool truncated = false;
};

/// Tracks the step counter and the active flag shared by every environment.
class EpisodeClock {
 public:
  explicit EpisodeClock(int horizon) : horizon_(horizon) {}
  void start() { steps_ = 0; active_ = true; }
  /// Throws if the episode already ended; advances the counter otherwise.
  void tick();
  /// Marks the outcome and returns whether the horizon truncates this step.
  bool finish_step(bool terminal);
  int steps() const { return steps_; }
  int horizon() const { return horizon_; }
  bool active() const { return active_; }

 private:
  int horizon_;
  int steps_ = 0;
  bool active_ = false;
};

/// Single-agent episodic decision process with reset/step semantics.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual ActionSpec action_spec() const = 0;
  virtual int horizon() const = 0;
  virtual double discount() const { return 0.99; }

  /// Samples the initial state from the seed-driven initial distribution.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Advances one step. Calling after a terminal or truncated step throws.
  virtual StepResult step(std::span<const double> action) = 0;

  /// Centre of the initial distribution (used as the default risk target).
  virtual std::vector<double> reference_initial_state() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// Two-player process whose joint state concatenates the victim's and the
/// adversary's coordinates.
class TwoPlayerEnvironment {
 public:
  virtual ~TwoPlayerEnvironment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual Projection victim_coordinates() const = 0;
  virtual Projection adversary_coordinates() const = 0;
  virtual ActionSpec victim_action_spec() const = 0;
  virtual ActionSpec adversary_action_spec() const = 0;
  virtual int horizon() const = 0;
  virtual double discount() const { return 0.99; }

  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Both actions are applied simultaneously. `success` reports victim success.
  virtual StepResult step(std::span<const double> victim_action,
                          std::span<const double> adversary_action) = 0;

  virtual std::vector<double> reference_initial_state() const = 0;
  virtual std::unique_ptr<TwoPlayerEnvironment> clone() const = 0;
};

}  // namespace advpol
