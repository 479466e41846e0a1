#include "advpol/mdp/victim.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace advpol {

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<double> NetworkVictim::act(std::span<const double> observation) const {
  return policy_.distribution(observation).mode();
}

std::uint64_t NetworkVictim::checksum() const { return fnv1a(policy_.parameters()); }

std::vector<double> GreedyPointVictim::act(std::span<const double> observation) const {
  if (observation.size() != 2) throw std::invalid_argument("greedy victim expects a 2-D observation");
  const double dx = goal_[0] - observation[0], dy = goal_[1] - observation[1];
  const double n = std::hypot(dx, dy);
  if (n == 0.0) return {0.0, 0.0};
  return {dx / n, dy / n};
}

std::uint64_t GreedyPointVictim::checksum() const { return fnv1a(goal_); }

std::vector<double> ScriptedGateRunner::act(std::span<const double> observation) const {
  if (observation.size() != 4) throw std::invalid_argument("gate runner expects the 4-D joint state");
  const double rx = observation[0], ry = observation[1], bx = observation[2], by = observation[3];
  if (avoid_) {
    const double ahead = bx - rx;
    if (ahead > 0.0 && ahead < kLookahead && std::abs(by - ry) < kCorridor) {
      const double side = ry >= by ? 1.0 : -1.0;
      return {0.6, 0.8 * side};
    }
  }
  return {1.0, 0.0};
}

std::uint64_t ScriptedGateRunner::checksum() const {
  const double tag[3] = {avoid_ ? 1.0 : 0.0, kLookahead, kCorridor};
  return fnv1a(tag);
}

}  // namespace advpol
