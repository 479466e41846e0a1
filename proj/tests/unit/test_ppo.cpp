#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "advpol/harness/harness.hpp"
#include "advpol/mdp/point_goal.hpp"
#include "advpol/mdp/threat_models.hpp"
#include "advpol/ppo/ppo.hpp"

using namespace advpol;
using namespace advpol::testing;

namespace {

// Direct finite-sum GAE on one segment: values has one bootstrap entry.
std::vector<double> naive_gae(const std::vector<double>& r, const std::vector<double>& v, double g, double l) {
  std::vector<double> adv(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double coef = 1.0;
    for (std::size_t k = t; k < r.size(); ++k) {
      adv[t] += coef * (r[k] + g * v[k + 1] - v[k]);
      coef *= g * l;
    }
  }
  return adv;
}

RolloutBatch point_goal_batch(PolicyHandle& policy, std::size_t steps, std::uint64_t seed) {
  std::vector<RolloutCollector> c;
  c.emplace_back(std::make_unique<TaskMdp>(std::make_unique<PointGoal>(PointGoalParams{.dense = true})), seed, 0);
  policy = initial_learner_policy(c[0].mdp(), 16, 0.0, seed);
  return collect_parallel(c, policy, steps);
}

}  // namespace

TEST_SUITE("ppo") {
  TEST_CASE("gae worked examples") {
    const std::vector<double> r = {1.0, 0.0};
    const std::vector<double> v = {0.0, 0.0, 0.0};
    const std::vector<std::size_t> b = {2};
    CHECK(compute_gae(r, v, b, 0.5, 1.0) == std::vector<double>{1.0, 0.0});
    const std::vector<double> zr(4, 0.0), zv(5, 0.0);
    const std::vector<std::size_t> zb = {4};
    CHECK(compute_gae(zr, zv, zb, 0.99, 0.95) == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(compute_gae(r, std::vector<double>{0.0, 0.0}, b, 0.5, 1.0), std::invalid_argument);
  }

  TEST_CASE("gae matches the finite sum per segment and never leaks across boundaries") {
    auto rng = make_rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::vector<std::size_t> lengths = {5, 1, 7, 3};
    std::vector<double> rewards, values;
    std::vector<std::size_t> bounds;
    std::vector<std::vector<double>> seg_r, seg_v;
    for (std::size_t len : lengths) {
      std::vector<double> r(len), v(len + 1);
      for (double& x : r) x = n(rng);
      for (double& x : v) x = n(rng);
      rewards.insert(rewards.end(), r.begin(), r.end());
      values.insert(values.end(), v.begin(), v.end());
      bounds.push_back(rewards.size());
      seg_r.push_back(r);
      seg_v.push_back(v);
    }
    for (double lambda : {0.0, 0.5, 0.95, 1.0}) {
      const auto adv = compute_gae(rewards, values, bounds, 0.9, lambda);
      std::size_t off = 0;
      for (std::size_t s = 0; s < lengths.size(); ++s) {
        const auto expect = naive_gae(seg_r[s], seg_v[s], 0.9, lambda);
        for (std::size_t t = 0; t < lengths[s]; ++t) {
          CHECK(adv[off + t] == doctest::Approx(expect[t]).epsilon(1e-12));
          if (lambda == 0.0) {
            CHECK(adv[off + t] == seg_r[s][t] + 0.9 * seg_v[s][t + 1] - seg_v[s][t]);
          }
        }
        off += lengths[s];
      }
    }
    // Changing the second segment leaves the first untouched.
    auto changed = rewards;
    changed[5] += 100.0;
    const auto a = compute_gae(rewards, values, bounds, 0.9, 0.95);
    const auto c = compute_gae(changed, values, bounds, 0.9, 0.95);
    for (std::size_t t = 0; t < 5; ++t) CHECK(a[t] == c[t]);
  }

  TEST_CASE("normalized advantages have zero mean and unit spread") {
    auto rng = make_rng(13);
    std::normal_distribution<double> n(3.0, 7.0);
    std::vector<double> x(1000);
    for (double& v : x) v = n(rng);
    normalize_in_place(x);
    double m = 0.0, s = 0.0;
    for (double v : x) m += v;
    m /= 1000.0;
    for (double v : x) s += (v - m) * (v - m);
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(std::sqrt(s / 1000.0) - 1.0) < 1e-6);
    std::vector<double> flat(10, 2.5);
    normalize_in_place(flat);
    CHECK(flat == std::vector<double>(10, 0.0));
  }

  TEST_CASE("config bounds") {
    PpoConfig c;
    c.clip_ratio = 1.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("ppo.clip_ratio"), std::invalid_argument);
    c = {};
    c.gae_lambda = 1.2;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("ppo.gae_lambda"), std::invalid_argument);
  }

  TEST_CASE("rollouts record segments, bootstraps and episodes consistently") {
    PolicyHandle p;
    RolloutBatch b = point_goal_batch(p, 700, 4);
    CHECK(b.size() == 700);
    CHECK(b.bootstrap_states.rows() == b.segments.size());
    std::size_t covered = 0;
    int finished = 0;
    for (const auto& s : b.segments) {
      CHECK(s.begin == covered);
      covered = s.end;
      if (s.ends_episode) ++finished;
    }
    CHECK(covered == b.size());
    CHECK(finished == static_cast<int>(b.episodes.size()));
  }

  TEST_CASE("one update improves the surrogate on its own batch") {
    PolicyHandle p;
    RolloutBatch b = point_goal_batch(p, 512, 5);
    PpoConfig cfg;
    cfg.epochs = 4;
    cfg.minibatch = 128;
    prepare_advantages(b, p, cfg, {false, false});
    std::vector<double> adv = b.adv_ext;
    const SurrogateLoss spec{&b.states, &b.actions, b.log_probs, adv, cfg.clip_ratio, 0.0};
    const double before = -loss_value(p, spec);
    Adam adam(p.num_parameters(), AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.max_grad_norm});
    auto rng = make_rng(5, kShuffleStream);
    const PpoStats st = ppo_update(p, adam, b, 1.0, cfg, rng, false);
    const double after = -loss_value(p, spec);
    CHECK(after > before);
    CHECK(st.minibatches == 16);
    CHECK(st.approx_kl >= 0.0);
  }

  TEST_CASE("zero temperature or a zero intrinsic advantage leaves policy and extrinsic value untouched by the intrinsic stream") {
    PolicyHandle base;
    RolloutBatch b = point_goal_batch(base, 600, 6);
    PpoConfig cfg;
    cfg.epochs = 3;
    b.int_rewards.assign(b.size(), 0.0);
    RolloutBatch with = b, without = b;
    prepare_advantages(with, base, cfg, {true, false});
    prepare_advantages(without, base, cfg, {false, false});
    RolloutBatch flat = with;
    flat.adv_int.assign(flat.size(), 0.0);
    for (const auto& [tau, batch] : {std::pair<double, const RolloutBatch*>{0.0, &with}, {1.0, &flat}}) {
      PolicyHandle p1 = base, p2 = base;
      Adam a1(base.num_parameters(), {}), a2(base.num_parameters(), {});
      auto r1 = make_rng(1), r2 = make_rng(1);
      ppo_update(p1, a1, *batch, tau, cfg, r1, true);
      ppo_update(p2, a2, without, tau, cfg, r2, false);
      for (Network net : {Network::kPolicy, Network::kValueExt}) {
        const auto [lo, hi] = base.network_range(net);
        for (std::size_t i = lo; i < hi; ++i) REQUIRE(p1.parameters()[i] == p2.parameters()[i]);
      }
    }
  }

  TEST_CASE("a non-finite advantage aborts the update and restores parameters") {
    PolicyHandle p;
    RolloutBatch b = point_goal_batch(p, 256, 7);
    PpoConfig cfg;
    prepare_advantages(b, p, cfg, {false, false});
    b.adv_ext[3] = std::nan("");
    const auto before = p.snapshot();
    Adam adam(p.num_parameters(), {});
    auto rng = make_rng(1);
    CHECK_THROWS_WITH_AS(ppo_update(p, adam, b, 1.0, cfg, rng, false), doctest::Contains("non-finite"),
                         std::runtime_error);
    CHECK(p.snapshot() == before);
  }
}
