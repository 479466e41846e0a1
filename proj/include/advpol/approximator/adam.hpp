#pragma once

#include <map>
#include <span>
#include <vector>

namespace advpol {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
};

/// Adam over a flat parameter vector. Each call updates one contiguous range
/// (one network); ranges keep separate step counters and clip their gradient
/// norm independently.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t num_parameters, AdamConfig config);

  /// Returns the gradient norm of the range before clipping.
  double step(std::span<double> params, std::span<const double> grad, std::size_t begin, std::size_t end);

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  std::map<std::size_t, long> steps_;  // keyed by range begin
};

}  // namespace advpol
