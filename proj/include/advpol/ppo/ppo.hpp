#pragma once

#include <span>
#include <vector>

#include "advpol/approximator/adam.hpp"
#include "advpol/approximator/policy.hpp"
#include "advpol/ppo/rollout.hpp"

namespace advpol {

struct PpoConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 10;
  std::size_t minibatch = 64;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  std::size_t batch_steps = 2048;
  double max_grad_norm = 0.5;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Advantages within each segment. `values` holds, for every segment, its
/// per-step values followed by one bootstrap value (0 for a terminal end).
/// `boundaries` lists segment end indices (exclusive) into `rewards`.
std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                std::span<const std::size_t> boundaries, double gamma, double lambda);

/// (x - mean) / std over the whole vector; a near-constant stream maps to zeros.
void normalize_in_place(std::vector<double>& x);

struct AdvantageOptions {
  bool intrinsic = true;            // compute the intrinsic stream at all
  bool intrinsic_episodic = false;  // if false, V_I is bootstrapped at terminals too
};

/// Evaluates both value networks on the batch and fills advantages and
/// return targets. Advantages are normalized per stream when configured;
/// return targets use the raw advantages.
void prepare_advantages(RolloutBatch& batch, const PolicyHandle& policy, const PpoConfig& config,
                        const AdvantageOptions& options = {});

struct PpoStats {
  double surrogate_loss = 0.0;  // mean over minibatches
  double clip_fraction = 0.0;   // mean over minibatches
  double approx_kl = 0.0;       // KL(pi_old, pi_new) estimate on the full batch after the update
  double value_loss_ext = 0.0;
  double value_loss_int = 0.0;
  int minibatches = 0;
};

/// Epochs of minibatch descent on the clipped surrogate with advantage
/// adv_ext + tau * adv_int, plus value regression. With `train_intrinsic`
/// false the intrinsic stream is ignored entirely. A non-finite loss or
/// gradient restores the parameters and throws std::runtime_error.
PpoStats ppo_update(PolicyHandle& policy, Adam& optimizer, const RolloutBatch& batch, double tau,
                    const PpoConfig& config, Rng& rng, bool train_intrinsic = true);

}  // namespace advpol
