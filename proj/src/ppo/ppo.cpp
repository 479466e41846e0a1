#include "advpol/ppo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "advpol/approximator/losses.hpp"

namespace advpol {

void PpoConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("ppo." + key + ": " + why);
  };
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) fail("clip_ratio", "must be in (0,1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must be in [0,1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda", "must be in [0,1]");
  if (epochs < 0) fail("epochs", "must be non-negative");
  if (minibatch == 0) fail("minibatch", "must be positive");
  if (!(learning_rate >= 0.0)) fail("learning_rate", "must be non-negative");
  if (!(value_coef >= 0.0)) fail("value_coef", "must be non-negative");
  if (!(entropy_coef >= 0.0)) fail("entropy_coef", "must be non-negative");
  if (batch_steps == 0) fail("batch_steps", "must be positive");
}

std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                std::span<const std::size_t> boundaries, double gamma, double lambda) {
  if (values.size() != rewards.size() + boundaries.size()) {
    throw std::invalid_argument("compute_gae: expected " + std::to_string(rewards.size() + boundaries.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  if (!boundaries.empty() && boundaries.back() != rewards.size()) {
    throw std::invalid_argument("compute_gae: last boundary must equal the number of rewards");
  }
  std::vector<double> adv(rewards.size(), 0.0);
  std::size_t begin = 0;
  for (std::size_t s = 0; s < boundaries.size(); ++s) {
    const std::size_t end = boundaries[s];
    if (end < begin) throw std::invalid_argument("compute_gae: boundaries must be non-decreasing");
    const std::size_t voff = begin + s;  // values index of step `begin`
    double running = 0.0;
    for (std::size_t t = end; t-- > begin;) {
      const std::size_t v = voff + (t - begin);
      const double delta = rewards[t] + gamma * values[v + 1] - values[v];
      running = delta + gamma * lambda * running;
      adv[t] = running;
    }
    begin = end;
  }
  return adv;
}

void normalize_in_place(std::vector<double>& x) {
  if (x.empty()) return;
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 1e-8)) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  for (double& v : x) v = (v - mean) / sd;
}

namespace {

// Per-step values with a bootstrap entry after each segment.
std::vector<double> interleave(const RolloutBatch& b, const std::vector<double>& v,
                               const std::vector<double>& boot, bool zero_at_terminal) {
  std::vector<double> out;
  out.reserve(v.size() + b.segments.size());
  for (std::size_t s = 0; s < b.segments.size(); ++s) {
    const auto& seg = b.segments[s];
    out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(seg.begin),
               v.begin() + static_cast<std::ptrdiff_t>(seg.end));
    out.push_back(seg.terminal && zero_at_terminal ? 0.0 : boot[s]);
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void prepare_advantages(RolloutBatch& batch, const PolicyHandle& policy, const PpoConfig& config,
                        const AdvantageOptions& options) {
  const std::size_t n = batch.size();
  if (n == 0) return;
  if (batch.int_rewards.size() != n) throw std::invalid_argument("prepare_advantages: intrinsic rewards missing");
  std::vector<std::size_t> boundaries;
  for (const auto& s : batch.segments) boundaries.push_back(s.end);

  const auto states = as_columns(batch.states);
  const auto boot = as_columns(batch.bootstrap_states);
  batch.v_ext = to_vector(policy.value_batch(Network::kValueExt, states));
  batch.bootstrap_v_ext = to_vector(policy.value_batch(Network::kValueExt, boot));
  batch.adv_ext = compute_gae(batch.ext_rewards, interleave(batch, batch.v_ext, batch.bootstrap_v_ext, true),
                              boundaries, config.gamma, config.gae_lambda);
  batch.ret_ext.resize(n);
  for (std::size_t i = 0; i < n; ++i) batch.ret_ext[i] = batch.adv_ext[i] + batch.v_ext[i];

  if (options.intrinsic) {
    batch.v_int = to_vector(policy.value_batch(Network::kValueInt, states));
    batch.bootstrap_v_int = to_vector(policy.value_batch(Network::kValueInt, boot));
    batch.adv_int = compute_gae(batch.int_rewards,
                                interleave(batch, batch.v_int, batch.bootstrap_v_int, options.intrinsic_episodic),
                                boundaries, config.gamma, config.gae_lambda);
    batch.ret_int.resize(n);
    for (std::size_t i = 0; i < n; ++i) batch.ret_int[i] = batch.adv_int[i] + batch.v_int[i];
  } else {
    batch.v_int.assign(n, 0.0);
    batch.bootstrap_v_int.assign(batch.segments.size(), 0.0);
    batch.adv_int.assign(n, 0.0);
    batch.ret_int.assign(n, 0.0);
  }
  if (config.normalize_advantages) {
    normalize_in_place(batch.adv_ext);
    normalize_in_place(batch.adv_int);
  }
}

namespace {

void gather(const StateMatrix& src, std::span<const std::size_t> idx, StateMatrix& dst) {
  dst = StateMatrix(idx.size(), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = src.row(idx[i]);
    std::copy(r.begin(), r.end(), dst.row(i).begin());
  }
}

void check_finite(const LossResult& r, const char* what, PolicyHandle& policy, const std::vector<double>& saved,
                  int epoch, std::size_t minibatch) {
  bool ok = std::isfinite(r.loss);
  for (double g : r.gradient) ok = ok && std::isfinite(g);
  if (ok) return;
  policy.restore(saved);
  std::ostringstream msg;
  msg << "ppo_update: non-finite " << what << " loss or gradient at epoch " << epoch << ", minibatch " << minibatch
      << " (loss " << r.loss << "); parameters restored";
  throw std::runtime_error(msg.str());
}

}  // namespace

PpoStats ppo_update(PolicyHandle& policy, Adam& optimizer, const RolloutBatch& batch, double tau,
                    const PpoConfig& config, Rng& rng, bool train_intrinsic) {
  config.validate();
  const std::size_t n = batch.size();
  PpoStats stats;
  if (n == 0 || config.epochs == 0) return stats;
  if (batch.adv_ext.size() != n || batch.ret_ext.size() != n ||
      (train_intrinsic && (batch.adv_int.size() != n || batch.ret_int.size() != n))) {
    throw std::invalid_argument("ppo_update: advantages not prepared");
  }
  if (!std::isfinite(tau)) throw std::invalid_argument("ppo_update: temperature must be finite");

  std::vector<double> combined(n);
  for (std::size_t i = 0; i < n; ++i) {
    combined[i] = train_intrinsic ? batch.adv_ext[i] + tau * batch.adv_int[i] : batch.adv_ext[i];
  }

  const std::vector<double> saved = policy.snapshot();
  const auto [pb, pe] = policy.network_range(Network::kPolicy);
  const auto [eb, ee] = policy.network_range(Network::kValueExt);
  const auto [ib, ie] = policy.network_range(Network::kValueInt);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  StateMatrix mb_states, mb_actions;
  std::vector<double> mb_logp, mb_adv, mb_ret_ext, mb_ret_int;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.minibatch) {
      const std::size_t end = std::min(n, start + config.minibatch);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      gather(batch.states, idx, mb_states);
      gather(batch.actions, idx, mb_actions);
      mb_logp.resize(idx.size());
      mb_adv.resize(idx.size());
      mb_ret_ext.resize(idx.size());
      mb_ret_int.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        mb_logp[i] = batch.log_probs[idx[i]];
        mb_adv[i] = combined[idx[i]];
        mb_ret_ext[i] = batch.ret_ext[idx[i]];
        if (train_intrinsic) mb_ret_int[i] = batch.ret_int[idx[i]];
      }

      const LossResult pl = loss_and_gradient(
          policy, SurrogateLoss{&mb_states, &mb_actions, mb_logp, mb_adv, config.clip_ratio, config.entropy_coef});
      check_finite(pl, "policy", policy, saved, epoch, start / config.minibatch);
      const LossResult vl =
          loss_and_gradient(policy, ValueLoss{Network::kValueExt, &mb_states, mb_ret_ext, config.value_coef});
      check_finite(vl, "extrinsic value", policy, saved, epoch, start / config.minibatch);
      LossResult il;
      if (train_intrinsic) {
        il = loss_and_gradient(policy, ValueLoss{Network::kValueInt, &mb_states, mb_ret_int, config.value_coef});
        check_finite(il, "intrinsic value", policy, saved, epoch, start / config.minibatch);
      }

      auto params = policy.parameters();
      optimizer.step(params, pl.gradient, pb, pe);
      policy.clamp_log_std();
      optimizer.step(params, vl.gradient, eb, ee);
      if (train_intrinsic) optimizer.step(params, il.gradient, ib, ie);

      stats.surrogate_loss += pl.loss;
      stats.clip_fraction += pl.clip_fraction;
      stats.value_loss_ext += vl.loss;
      stats.value_loss_int += il.loss;
      ++stats.minibatches;
    }
  }
  const double m = static_cast<double>(stats.minibatches);
  stats.surrogate_loss /= m;
  stats.clip_fraction /= m;
  stats.value_loss_ext /= m;
  stats.value_loss_int /= m;
  stats.approx_kl =
      evaluate_loss(policy, SurrogateLoss{&batch.states, &batch.actions, batch.log_probs, combined, config.clip_ratio,
                                          0.0})
          .approx_kl;
  return stats;
}

}  // namespace advpol
