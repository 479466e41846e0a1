#include "advpol/mdp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {

ActionSpec ActionSpec::continuous(std::vector<double> low, std::vector<double> high) {
  if (low.size() != high.size() || low.empty()) {
    throw std::invalid_argument("ActionSpec: bound vectors must be non-empty and equal length");
  }
  ActionSpec spec;
  spec.kind = Kind::kContinuous;
  spec.dim = low.size();
  spec.low = std::move(low);
  spec.high = std::move(high);
  return spec;
}

ActionSpec ActionSpec::box(std::size_t dim, double bound) {
  return continuous(std::vector<double>(dim, -bound), std::vector<double>(dim, bound));
}

ActionSpec ActionSpec::discrete(std::size_t n) {
  if (n < 2) throw std::invalid_argument("ActionSpec: discrete space needs at least 2 actions");
  ActionSpec spec;
  spec.kind = Kind::kDiscrete;
  spec.cardinality = n;
  return spec;
}

std::vector<double> ActionSpec::clip(std::span<const double> action) const {
  if (action.size() != width()) {
    throw std::invalid_argument("action has " + std::to_string(action.size()) +
                                " coordinates, expected " + std::to_string(width()));
  }
  if (is_discrete()) {
    const double a = action[0];
    if (!(a >= 0.0) || a >= static_cast<double>(cardinality) || a != std::floor(a)) {
      throw std::invalid_argument("discrete action out of range: " + std::to_string(a));
    }
    return {a};
  }
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(action[i])) throw std::invalid_argument("non-finite action coordinate");
    out[i] = std::clamp(action[i], low[i], high[i]);
  }
  return out;
}

void EpisodeClock::tick() {
  if (!active_) throw std::logic_error("step called on a finished episode; call reset first");
  ++steps_;
}

bool EpisodeClock::finish_step(bool terminal) {
  if (terminal) {
    active_ = false;
    return false;
  }
  if (steps_ >= horizon_) {
    active_ = false;
    return true;
  }
  return false;
}

}  // namespace advpol
