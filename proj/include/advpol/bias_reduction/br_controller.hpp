#pragma once

#include <optional>

namespace advpol {

struct BrConfig {
  bool enabled = false;
  double eta = 10.0;
  double constant_tau = 1.0;  // used when disabled
  double lambda0 = 0.0;
};

/// Lagrangian temperature controller: lambda <- max(0, lambda - eta * dJ),
/// tau = 1 / (1 + lambda), where dJ is the change of the adversary's
/// extrinsic objective between consecutive updates.
class BrController {
 public:
  explicit BrController(BrConfig config = {}, std::optional<double> reference = std::nullopt);

  /// Feeds a new objective estimate. The first call only records the
  /// reference. Throws on non-finite input or when disabled.
  void update(double j_ap);

  double temperature() const;
  double lambda() const { return lambda_; }
  bool enabled() const { return config_.enabled; }
  std::optional<double> reference() const { return reference_; }
  const BrConfig& config() const { return config_; }

 private:
  BrConfig config_;
  double lambda_;
  std::optional<double> reference_;
};

}  // namespace advpol
