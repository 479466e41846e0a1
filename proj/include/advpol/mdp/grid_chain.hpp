#pragma once

#include <span>
#include <vector>

#include "advpol/mdp/environment.hpp"

namespace advpol {

struct GridChainParams {
  std::size_t length = 5;  // number of states
  double slip = 0.1;       // probability that the chosen direction is reversed
  int horizon = 50;
};

/// States 0..n-1 on a line, actions {0: left, 1: right}. Starts in state 0;
/// reaching the right end succeeds and terminates the episode. The state
/// vector is the single coordinate [index].
class GridChain final : public Environment {
 public:
  explicit GridChain(GridChainParams params = {});

  std::string name() const override { return "grid_chain"; }
  std::size_t state_dim() const override { return 1; }
  ActionSpec action_spec() const override { return ActionSpec::discrete(2); }
  int horizon() const override { return params_.horizon; }

  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::vector<double> reference_initial_state() const override { return {0.0}; }
  std::unique_ptr<Environment> clone() const override;

  std::size_t num_states() const { return params_.length; }
  std::size_t goal_state() const { return params_.length - 1; }
  const GridChainParams& params() const { return params_; }

  /// Row-stochastic transition matrix for `action`, flattened row-major
  /// (n x n). The goal row is all zeros: the episode ends on arrival.
  std::vector<double> transition_matrix(int action) const;

 private:
  GridChainParams params_;
  EpisodeClock clock_;
  std::size_t position_ = 0;
  Rng rng_;
};

/// Exact discounted state distribution d(s) = (1-g) sum_t g^t P(s_t = s) of
/// the episodic chain under a tabular policy with P(right | s) = prob_right[s],
/// solved as a linear system. The goal state is counted once, on arrival.
std::vector<double> grid_chain_visitation(const GridChain& chain, std::span<const double> prob_right,
                                          double gamma);

}  // namespace advpol
