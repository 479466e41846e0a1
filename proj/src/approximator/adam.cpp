#include "advpol/approximator/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace advpol {

Adam::Adam(std::size_t num_parameters, AdamConfig config)
    : config_(config), m_(num_parameters, 0.0), v_(num_parameters, 0.0) {
  if (!(config_.learning_rate >= 0.0)) throw std::invalid_argument("adam: learning rate must be non-negative");
}

double Adam::step(std::span<double> params, std::span<const double> grad, std::size_t begin, std::size_t end) {
  if (params.size() != m_.size() || grad.size() != m_.size() || begin > end || end > m_.size()) {
    throw std::invalid_argument("adam: parameter/gradient size mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = begin; i < end; ++i) sq += grad[i] * grad[i];
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw std::runtime_error("adam: non-finite gradient");
  double scale = 1.0;
  if (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm) scale = config_.max_grad_norm / norm;

  const long t = ++steps_[begin];
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
  for (std::size_t i = begin; i < end; ++i) {
    const double g = grad[i] * scale;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g * g;
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
  return norm;
}

}  // namespace advpol
