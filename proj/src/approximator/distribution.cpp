#include "advpol/approximator/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace advpol {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)
}

ActionDistribution ActionDistribution::gaussian(std::vector<double> mean, std::vector<double> std) {
  if (mean.size() != std.size() || mean.empty()) throw std::invalid_argument("gaussian: mean/std size mismatch");
  for (double s : std) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("gaussian: std must be positive and finite");
  }
  ActionDistribution d;
  d.kind_ = HeadKind::kGaussian;
  d.mean_ = std::move(mean);
  d.std_ = std::move(std);
  return d;
}

ActionDistribution ActionDistribution::categorical_from_logits(std::span<const double> logits) {
  if (logits.size() < 2) throw std::invalid_argument("categorical: need at least two logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double lse = mx + std::log(z);
  ActionDistribution d;
  d.kind_ = HeadKind::kCategorical;
  d.log_probs_.reserve(logits.size());
  for (double l : logits) d.log_probs_.push_back(l - lse);
  return d;
}

ActionDistribution ActionDistribution::categorical(std::vector<double> probs) {
  if (probs.size() < 2) throw std::invalid_argument("categorical: need at least two outcomes");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("categorical: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("categorical: probabilities must sum to 1");
  ActionDistribution d;
  d.kind_ = HeadKind::kCategorical;
  for (double p : probs) d.log_probs_.push_back(std::log(p));
  return d;
}

std::vector<double> ActionDistribution::probs() const {
  std::vector<double> p;
  p.reserve(log_probs_.size());
  for (double l : log_probs_) p.push_back(std::exp(l));
  return p;
}

double ActionDistribution::log_prob(std::span<const double> action) const {
  if (kind_ == HeadKind::kCategorical) {
    if (action.size() != 1) throw std::invalid_argument("categorical log_prob expects one index");
    const auto idx = static_cast<std::size_t>(action[0]);
    if (idx >= log_probs_.size()) throw std::invalid_argument("categorical log_prob: index out of range");
    return log_probs_[idx];
  }
  if (action.size() != mean_.size()) throw std::invalid_argument("gaussian log_prob: action size mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double z = (action[i] - mean_[i]) / std_[i];
    lp += -0.5 * z * z - std::log(std_[i]) - kHalfLog2Pi;
  }
  return lp;
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  if (kind_ == HeadKind::kCategorical) {
    for (double l : log_probs_) {
      const double p = std::exp(l);
      if (p > 0.0) h -= p * l;
    }
    return h;
  }
  for (double s : std_) h += std::log(s) + 0.5 + kHalfLog2Pi;
  return h;
}

std::vector<double> ActionDistribution::sample(Rng& rng) const {
  if (kind_ == HeadKind::kCategorical) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t i = 0; i + 1 < log_probs_.size(); ++i) {
      u -= std::exp(log_probs_[i]);
      if (u < 0.0) return {static_cast<double>(i)};
    }
    return {static_cast<double>(log_probs_.size() - 1)};
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(mean_.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = mean_[i] + std_[i] * normal(rng);
  return a;
}

std::vector<double> ActionDistribution::mode() const {
  if (kind_ == HeadKind::kGaussian) return mean_;
  const auto it = std::max_element(log_probs_.begin(), log_probs_.end());
  return {static_cast<double>(it - log_probs_.begin())};
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
  if (p.kind() != q.kind() || p.dim() != q.dim()) throw std::invalid_argument("kl_divergence: head mismatch");
  double kl = 0.0;
  if (p.kind() == HeadKind::kCategorical) {
    const auto& lp = p.log_probs();
    const auto& lq = q.log_probs();
    for (std::size_t i = 0; i < lp.size(); ++i) {
      const double pi = std::exp(lp[i]);
      if (pi > 0.0) kl += pi * (lp[i] - lq[i]);
    }
    return std::max(kl, 0.0);
  }
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double sp = p.stddev()[i], sq = q.stddev()[i];
    const double dm = p.mean()[i] - q.mean()[i];
    kl += std::log(sq / sp) + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5;
  }
  return std::max(kl, 0.0);
}

}  // namespace advpol
