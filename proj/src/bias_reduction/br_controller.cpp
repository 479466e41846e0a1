#include "advpol/bias_reduction/br_controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {

BrController::BrController(BrConfig config, std::optional<double> reference)
    : config_(config), lambda_(config.lambda0), reference_(reference) {
  if (!(config_.eta > 0.0) || !std::isfinite(config_.eta)) throw std::invalid_argument("br.eta must be positive");
  if (!(config_.lambda0 >= 0.0) || !std::isfinite(config_.lambda0)) {
    throw std::invalid_argument("br.lambda0 must be non-negative");
  }
  if (!(config_.constant_tau >= 0.0 && config_.constant_tau <= 1.0)) {
    throw std::invalid_argument("br.constant_tau must be in [0,1]");
  }
}

void BrController::update(double j_ap) {
  if (!config_.enabled) throw std::logic_error("BrController::update called while disabled");
  if (!std::isfinite(j_ap)) throw std::invalid_argument("BrController::update: objective estimate is not finite");
  if (reference_) lambda_ = std::max(0.0, lambda_ - config_.eta * (j_ap - *reference_));
  reference_ = j_ap;
}

double BrController::temperature() const {
  if (!config_.enabled) return config_.constant_tau;
  return 1.0 / (1.0 + lambda_);
}

}  // namespace advpol
