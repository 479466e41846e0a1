#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "advpol/approximator/losses.hpp"

namespace advpol::testing {

/// Central finite differences of the mean batch loss over every parameter.
inline std::vector<double> fd_gradient(const PolicyHandle& policy, const LossSpec& spec, double h = 1e-5) {
  PolicyHandle probe = policy;
  std::vector<double> g(policy.num_parameters());
  auto params = probe.parameters();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = params[i];
    params[i] = x + h;
    const double up = loss_value(probe, spec);
    params[i] = x - h;
    const double down = loss_value(probe, spec);
    params[i] = x;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest |a - b| / max(|a|, |b|, floor) over coordinates.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

inline StateMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  StateMatrix m(rows, cols);
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : m.data()) v = n(rng);
  return m;
}

/// A randomly initialized policy whose log-std and head weights are moved
/// off their defaults so that every gradient path is exercised.
inline PolicyHandle random_policy(HeadKind head, std::size_t in, std::size_t out, std::size_t hidden, Rng& rng) {
  PolicyInit init;
  init.hidden = hidden;
  init.policy_head_gain = 1.0;
  init.log_std_init = -0.3;
  PolicyHandle p = PolicyHandle::create(head, in, out, init, rng);
  if (head == HeadKind::kGaussian) {
    const auto& seg = p.segment("policy.log_std");
    std::uniform_real_distribution<double> u(-0.8, 0.4);
    for (std::size_t i = 0; i < seg.size(); ++i) p.parameters()[seg.offset + i] = u(rng);
  }
  std::normal_distribution<double> n(0.0, 0.1);
  for (const char* name : {"policy.l1.bias", "value_ext.l1.bias", "value_int.l2.bias"}) {
    const auto& seg = p.segment(name);
    for (std::size_t i = 0; i < seg.size(); ++i) p.parameters()[seg.offset + i] = n(rng);
  }
  return p;
}

/// Batch actions sampled from the policy; old log-probs are the current ones
/// shifted by noise so that ratios spread around 1.
struct SurrogateBatch {
  StateMatrix states, actions;
  std::vector<double> old_log_prob, advantage;
};

inline SurrogateBatch surrogate_batch(const PolicyHandle& policy, std::size_t n, Rng& rng) {
  SurrogateBatch b;
  b.states = random_matrix(n, policy.input_dim(), rng);
  const std::size_t width = policy.head_kind() == HeadKind::kGaussian ? policy.output_dim() : 1;
  b.actions = StateMatrix(n, width);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::normal_distribution<double> adv(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = policy.distribution(b.states.row(i));
    const auto a = d.sample(rng);
    std::copy(a.begin(), a.end(), b.actions.row(i).begin());
    b.old_log_prob.push_back(d.log_prob(a) + noise(rng));
    b.advantage.push_back(adv(rng));
  }
  return b;
}

}  // namespace advpol::testing
