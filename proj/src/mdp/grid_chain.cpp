#include "advpol/mdp/grid_chain.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace advpol {

GridChain::GridChain(GridChainParams params) : params_(params), clock_(params.horizon) {
  if (params_.length < 2) throw std::invalid_argument("grid_chain: length must be at least 2");
  if (params_.slip < 0.0 || params_.slip >= 0.5) throw std::invalid_argument("grid_chain: slip must lie in [0, 0.5)");
  if (params_.horizon < 1) throw std::invalid_argument("grid_chain: horizon must be positive");
}

std::vector<double> GridChain::reset(std::uint64_t seed) {
  rng_ = make_rng(seed, 0x67726964);
  position_ = 0;
  clock_.start();
  return {0.0};
}

StepResult GridChain::step(std::span<const double> action) {
  const auto a = action_spec().clip(action);
  clock_.tick();
  bool right = a[0] == 1.0;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < params_.slip) right = !right;
  if (right) {
    ++position_;
  } else if (position_ > 0) {
    --position_;
  }
  StepResult r;
  r.state = {static_cast<double>(position_)};
  r.success = position_ == goal_state();
  r.reward = r.success ? 1.0 : 0.0;
  r.terminal = r.success;
  r.truncated = clock_.finish_step(r.terminal);
  return r;
}

std::unique_ptr<Environment> GridChain::clone() const { return std::make_unique<GridChain>(*this); }

std::vector<double> GridChain::transition_matrix(int action) const {
  const std::size_t n = params_.length;
  std::vector<double> p(n * n, 0.0);
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const double p_right = action == 1 ? 1.0 - params_.slip : params_.slip;
    p[s * n + s + 1] += p_right;
    p[s * n + (s == 0 ? 0 : s - 1)] += 1.0 - p_right;
  }
  return p;
}

std::vector<double> grid_chain_visitation(const GridChain& chain, std::span<const double> prob_right,
                                          double gamma) {
  const std::size_t n = chain.num_states();
  if (prob_right.size() != n) throw std::invalid_argument("grid_chain_visitation: one probability per state");
  const auto left = chain.transition_matrix(0);
  const auto right = chain.transition_matrix(1);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const double p = prob_right[s] * right[s * n + t] + (1.0 - prob_right[s]) * left[s * n + t];
      // d^T (I - g P) = (1-g) mu^T  <=>  (I - g P)^T d = (1-g) mu
      system(t, s) -= gamma * p;
    }
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  mu(0) = 1.0 - gamma;
  const Eigen::VectorXd d = system.partialPivLu().solve(mu);
  return {d.data(), d.data() + n};
}

}  // namespace advpol
