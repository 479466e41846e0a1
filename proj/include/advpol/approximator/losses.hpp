#pragma once

#include <span>
#include <variant>
#include <vector>

#include "advpol/approximator/policy.hpp"

namespace advpol {

/// Clipped-surrogate policy loss: -mean(min(r A, clip(r, 1-e, 1+e) A)) - c_H mean(H).
struct SurrogateLoss {
  const StateMatrix* states = nullptr;
  const StateMatrix* actions = nullptr;
  std::span<const double> old_log_prob;
  std::span<const double> advantage;
  double clip_ratio = 0.2;
  double entropy_coef = 0.0;
};

/// Squared-error regression of one value network: coef * 0.5 * mean((V - y)^2).
struct ValueLoss {
  Network net = Network::kValueExt;
  const StateMatrix* states = nullptr;
  std::span<const double> targets;
  double coef = 0.5;
};

/// Mean over states and targets of KL(pi(.|s) || target_j(.|s)). Each target
/// holds head outputs evaluated on `states`.
struct MimicKlLoss {
  const StateMatrix* states = nullptr;
  const std::vector<BatchDistribution>* targets = nullptr;
};

using LossSpec = std::variant<SurrogateLoss, ValueLoss, MimicKlLoss>;

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as PolicyHandle::parameters()
  double clip_fraction = 0.0;    // surrogate only
  double approx_kl = 0.0;        // surrogate only: mean((r - 1) - ln r)
};

/// Samples per gradient chunk. Chunks are reduced in index order, so the
/// result does not depend on the number of threads.
inline constexpr std::size_t kGradientChunk = 32;

/// Analytic gradient of the mean batch loss. Batched over chunks, parallel
/// with OpenMP. Never mutates the policy.
LossResult loss_and_gradient(const PolicyHandle& policy, const LossSpec& spec);

/// Per-sample serial implementation used as a test oracle and benchmark baseline.
LossResult loss_and_gradient_reference(const PolicyHandle& policy, const LossSpec& spec);

/// Loss and surrogate diagnostics without the backward pass.
LossResult evaluate_loss(const PolicyHandle& policy, const LossSpec& spec);

/// Mean batch loss only (no gradient).
double loss_value(const PolicyHandle& policy, const LossSpec& spec);

/// Per-sample surrogate min(r A, clip(r) A).
double clipped_objective(double ratio, double advantage, double clip_ratio);
/// True when the clipped branch is active, i.e. the sample has zero gradient.
bool surrogate_clipped(double ratio, double advantage, double clip_ratio);

}  // namespace advpol
