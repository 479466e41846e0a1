#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "../support/oracles.hpp"
#include "advpol/approximator/adam.hpp"
#include "advpol/approximator/checkpoint.hpp"
#include "advpol/approximator/losses.hpp"

using namespace advpol;
using namespace advpol::testing;

namespace {

double gaussian_log_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

std::vector<BatchDistribution> mimic_targets(const StateMatrix& states, HeadKind head, std::size_t in,
                                             std::size_t out, int count, Rng& rng) {
  std::vector<BatchDistribution> t;
  for (int i = 0; i < count; ++i) t.push_back(random_policy(head, in, out, 8, rng).distribution_batch(as_columns(states)));
  return t;
}

void check_gradient(const PolicyHandle& policy, const LossSpec& spec) {
  const auto analytic = loss_and_gradient(policy, spec).gradient;
  const auto reference = loss_and_gradient_reference(policy, spec).gradient;
  const auto fd = fd_gradient(policy, spec);
  CHECK(max_relative_error(analytic, fd) < 1e-4);
  CHECK(max_relative_error(reference, fd) < 1e-4);
  CHECK(max_relative_error(analytic, reference, 1e-12) < 1e-9);
}

}  // namespace

TEST_SUITE("approximator") {
  TEST_CASE("log densities and masses") {
    const auto std_normal = ActionDistribution::gaussian({0.0}, {1.0});
    const double zero = 0.0;
    CHECK(std_normal.log_prob(std::span<const double>(&zero, 1)) == doctest::Approx(-0.9189385332));
    const auto g = ActionDistribution::gaussian({1.0}, {2.0});
    const double three = 3.0;
    CHECK(g.log_prob(std::span<const double>(&three, 1)) == doctest::Approx(gaussian_log_density(3.0, 1.0, 2.0)));
    CHECK(g.log_prob(std::span<const double>(&three, 1)) == doctest::Approx(-2.1121).epsilon(1e-4));
    const auto c = ActionDistribution::categorical({0.5, 0.5});
    CHECK(c.log_prob(std::span<const double>(&zero, 1)) == doctest::Approx(std::log(0.5)));
  }

  TEST_CASE("closed-form KL") {
    const auto p = ActionDistribution::gaussian({1.0}, {1.0});
    const auto q = ActionDistribution::gaussian({0.0}, {1.0});
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(p, q) == doctest::Approx(0.5));
    const auto a = ActionDistribution::categorical({1.0, 0.0});
    const auto b = ActionDistribution::categorical({0.5, 0.5});
    CHECK(kl_divergence(a, b) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(kl_divergence(p, b), std::invalid_argument);

    // Monte-Carlo oracle for a 2-D Gaussian pair.
    const auto x = ActionDistribution::gaussian({0.3, -0.2}, {0.7, 1.3});
    const auto y = ActionDistribution::gaussian({-0.1, 0.4}, {1.1, 0.9});
    auto rng = make_rng(5);
    double mc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const auto s = x.sample(rng);
      mc += x.log_prob(s) - y.log_prob(s);
    }
    CHECK(kl_divergence(x, y) == doctest::Approx(mc / n).epsilon(0.01));
  }

  TEST_CASE("categorical probabilities sum to one") {
    const double logits[4] = {3.0, -1.0, 0.5, 700.0};
    const auto d = ActionDistribution::categorical_from_logits(logits);
    double s = 0.0;
    for (double p : d.probs()) s += p;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }

  TEST_CASE("gaussian sampling matches its moments") {
    const auto d = ActionDistribution::gaussian({0.4}, {1.7});
    auto rng = make_rng(11);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = d.sample(rng)[0];
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n, var = sq / n - mean * mean;
    CHECK(std::abs(mean - 0.4) < 3.0 * 1.7 / std::sqrt(n));
    // Standard error of the sample variance is sigma^2 sqrt(2/n).
    CHECK(std::abs(var - 1.7 * 1.7) < 3.0 * 1.7 * 1.7 * std::sqrt(2.0 / n));
  }

  TEST_CASE("forward pass contracts") {
    auto rng = make_rng(1);
    PolicyHandle p = PolicyHandle::create(HeadKind::kGaussian, 3, 2, {}, rng);
    const auto& head = p.segment("policy.head.weight");
    const auto& bias = p.segment("policy.head.bias");
    for (std::size_t i = 0; i < head.size(); ++i) p.parameters()[head.offset + i] = 0.0;
    for (std::size_t i = 0; i < bias.size(); ++i) p.parameters()[bias.offset + i] = 0.0;
    const std::vector<double> s = {0.3, -2.0, 1.0};
    const Evaluation e = p.forward(s);
    CHECK(e.dist.mean() == std::vector<double>{0.0, 0.0});
    const Evaluation again = p.forward(s);
    CHECK(again.v_ext == e.v_ext);
    CHECK(again.v_int == e.v_int);
    CHECK_THROWS_AS(p.forward(std::vector<double>{1.0}), std::invalid_argument);

    for (int trial = 0; trial < 50; ++trial) {
      PolicyHandle r = random_policy(trial % 2 ? HeadKind::kGaussian : HeadKind::kCategorical, 4, 3, 16, rng);
      const auto x = random_matrix(1, 4, rng, 10.0);
      const Evaluation f = r.forward(x.row(0));
      CHECK(std::isfinite(f.v_ext));
      CHECK(std::isfinite(f.v_int));
      CHECK(std::isfinite(f.dist.entropy()));
    }
  }

  TEST_CASE("log-std is clamped and snapshots restore exactly") {
    auto rng = make_rng(2);
    PolicyInit init;
    init.log_std_init = 7.0;
    PolicyHandle p = PolicyHandle::create(HeadKind::kGaussian, 2, 2, init, rng);
    for (double v : p.log_std()) CHECK(v == kLogStdMax);
    const auto snap = p.snapshot();
    p.parameters()[0] += 1.0;
    p.restore(snap);
    CHECK(p.snapshot() == snap);
  }

  TEST_CASE("gradients match central finite differences") {
    auto rng = make_rng(42);
    for (HeadKind head : {HeadKind::kGaussian, HeadKind::kCategorical}) {
      CAPTURE(static_cast<int>(head));
      const std::size_t out = head == HeadKind::kGaussian ? 2 : 3;
      const PolicyHandle p = random_policy(head, 3, out, 8, rng);
      const auto b = surrogate_batch(p, 10, rng);
      check_gradient(p, SurrogateLoss{&b.states, &b.actions, b.old_log_prob, b.advantage, 0.2, 0.0});
      check_gradient(p, SurrogateLoss{&b.states, &b.actions, b.old_log_prob, b.advantage, 0.2, 0.05});

      std::vector<double> targets;
      std::normal_distribution<double> n(0.0, 1.0);
      for (int i = 0; i < 10; ++i) targets.push_back(n(rng));
      check_gradient(p, ValueLoss{Network::kValueExt, &b.states, targets, 0.5});
      check_gradient(p, ValueLoss{Network::kValueInt, &b.states, targets, 0.5});

      const auto t = mimic_targets(b.states, head, 3, out, 3, rng);
      check_gradient(p, MimicKlLoss{&b.states, &t});
    }
  }

  TEST_CASE("chunked gradient over many chunks equals the per-sample reference") {
    auto rng = make_rng(9);
    const PolicyHandle p = random_policy(HeadKind::kGaussian, 4, 2, 16, rng);
    const auto b = surrogate_batch(p, 3 * kGradientChunk + 7, rng);
    const SurrogateLoss spec{&b.states, &b.actions, b.old_log_prob, b.advantage, 0.2, 0.01};
    const auto fast = loss_and_gradient(p, spec);
    const auto ref = loss_and_gradient_reference(p, spec);
    CHECK(fast.loss == doctest::Approx(ref.loss).epsilon(1e-12));
    CHECK(max_relative_error(fast.gradient, ref.gradient, 1e-12) < 1e-9);
    CHECK(fast.clip_fraction == ref.clip_fraction);
  }

  TEST_CASE("zero advantages give a zero policy gradient") {
    auto rng = make_rng(3);
    const PolicyHandle p = random_policy(HeadKind::kGaussian, 3, 2, 8, rng);
    auto b = surrogate_batch(p, 10, rng);
    std::fill(b.advantage.begin(), b.advantage.end(), 0.0);
    const auto r = loss_and_gradient(p, SurrogateLoss{&b.states, &b.actions, b.old_log_prob, b.advantage, 0.2, 0.0});
    const auto [begin, end] = p.network_range(Network::kPolicy);
    for (std::size_t i = begin; i < end; ++i) CHECK(r.gradient[i] == 0.0);
  }

  TEST_CASE("clipped-out samples contribute exactly zero gradient") {
    auto rng = make_rng(4);
    const PolicyHandle p = random_policy(HeadKind::kGaussian, 3, 2, 8, rng);
    auto b = surrogate_batch(p, 1, rng);
    const double lp = p.distribution(b.states.row(0)).log_prob(b.actions.row(0));
    struct Case {
      double ratio, adv;
      bool zero;
    };
    for (const Case c : {Case{1.5, 1.0, true}, Case{0.5, -1.0, true}, Case{1.5, -1.0, false},
                         Case{0.5, 1.0, false}, Case{1.1, 1.0, false}}) {
      CAPTURE(c.ratio);
      CAPTURE(c.adv);
      const std::vector<double> old = {lp - std::log(c.ratio)};
      const std::vector<double> adv = {c.adv};
      const auto r = loss_and_gradient(p, SurrogateLoss{&b.states, &b.actions, old, adv, 0.2, 0.0});
      double norm = 0.0;
      for (double g : r.gradient) norm += g * g;
      CHECK(surrogate_clipped(c.ratio, c.adv, 0.2) == c.zero);
      CHECK((norm == 0.0) == c.zero);
    }
  }

  TEST_CASE("clip and min contracts of the surrogate") {
    CHECK(clipped_objective(1.3, 1.0, 0.2) == doctest::Approx(1.2));
    CHECK(clipped_objective(1.3, -1.0, 0.2) == doctest::Approx(-1.3));
    auto rng = make_rng(6);
    std::uniform_real_distribution<double> r(0.0, 3.0), a(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
      const double ratio = r(rng), adv = a(rng);
      CHECK(clipped_objective(ratio, adv, 0.2) <= ratio * adv + 1e-15);
    }
  }

  TEST_CASE("gradient evaluation never mutates the policy") {
    auto rng = make_rng(7);
    const PolicyHandle p = random_policy(HeadKind::kCategorical, 3, 4, 8, rng);
    const auto before = p.snapshot();
    const auto b = surrogate_batch(p, 40, rng);
    (void)loss_and_gradient(p, SurrogateLoss{&b.states, &b.actions, b.old_log_prob, b.advantage, 0.2, 0.1});
    CHECK(p.snapshot() == before);
  }

  TEST_CASE("adam clips each network range separately") {
    std::vector<double> params(4, 0.0);
    Adam adam(4, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.5});
    const std::vector<double> grad = {3.0, 4.0, 0.0, 0.0};
    CHECK(adam.step(params, grad, 0, 2) == doctest::Approx(5.0));
    // The first Adam step moves each coordinate by the learning rate.
    CHECK(params[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(params[2] == 0.0);
    const std::vector<double> bad = {std::nan(""), 0.0, 0.0, 0.0};
    CHECK_THROWS(adam.step(params, bad, 0, 2));
  }

  TEST_CASE("checkpoints round-trip") {
    auto rng = make_rng(8);
    for (HeadKind head : {HeadKind::kGaussian, HeadKind::kCategorical}) {
      const PolicyHandle p = random_policy(head, 3, 2, 8, rng);
      const auto path = std::filesystem::temp_directory_path() / "advpol_ckpt_test.json";
      save_policy(path, p, {{"note", "unit"}});
      nlohmann::json meta;
      const PolicyHandle q = load_policy(path, &meta);
      CHECK(meta["note"] == "unit");
      CHECK(q.head_kind() == head);
      const auto a = p.parameters();
      const auto b = q.parameters();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      std::filesystem::remove(path);
    }
    CHECK_THROWS(policy_from_json(nlohmann::json{{"format_version", 99}}));
  }
}
