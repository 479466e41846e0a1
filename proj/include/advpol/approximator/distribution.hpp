#pragma once

#include <span>
#include <vector>

#include "advpol/common.hpp"

namespace advpol {

enum class HeadKind { kGaussian, kCategorical };

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// A single-state action distribution: diagonal Gaussian (mean, std) or
/// categorical (log-probabilities, from which probabilities are derived).
class ActionDistribution {
 public:
  static ActionDistribution gaussian(std::vector<double> mean, std::vector<double> std);
  static ActionDistribution categorical_from_logits(std::span<const double> logits);
  static ActionDistribution categorical(std::vector<double> probs);

  HeadKind kind() const { return kind_; }
  std::size_t dim() const { return kind_ == HeadKind::kGaussian ? mean_.size() : log_probs_.size(); }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  std::vector<double> probs() const;

  double log_prob(std::span<const double> action) const;
  double entropy() const;
  std::vector<double> sample(Rng& rng) const;
  /// Mean for Gaussian heads, arg-max for categorical heads.
  std::vector<double> mode() const;

 private:
  HeadKind kind_ = HeadKind::kGaussian;
  std::vector<double> mean_, std_;
  std::vector<double> log_probs_;
};

/// Closed-form KL(p || q). Throws when the heads differ in kind or size.
double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);

}  // namespace advpol
