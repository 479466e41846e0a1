#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "../support/oracles.hpp"
#include "advpol/approximator/checkpoint.hpp"
#include "advpol/harness/harness.hpp"
#include "advpol/io/outputs.hpp"
#include "advpol/mdp/catalog.hpp"

using namespace advpol;

namespace {

// One-step episodes; the victim succeeds on two of every five.
class ScheduleMdp final : public LearnerMdp {
 public:
  std::string name() const override { return "schedule"; }
  std::size_t state_dim() const override { return 1; }
  ActionSpec action_spec() const override { return ActionSpec::box(1, 1.0); }
  int horizon() const override { return 1; }
  double discount() const override { return 0.99; }
  std::vector<double> reset(std::uint64_t) override { return {static_cast<double>(episode_++)}; }
  Transition step(std::span<const double> a) override {
    Transition t;
    t.state = {static_cast<double>(episode_ - 1)};
    t.action.assign(a.begin(), a.end());
    t.applied_action = t.action;
    t.next_state = t.state;
    t.victim_succeeded = (episode_ - 1) % 5 >= 3;
    t.ext_reward = t.victim_succeeded ? -1.0 : 0.0;
    t.task_reward = t.victim_succeeded ? 1.0 : 0.0;
    t.terminal = true;
    return t;
  }
  std::vector<double> victim_reference_state() const override { return {0.0}; }
  std::unique_ptr<LearnerMdp> clone() const override { return std::make_unique<ScheduleMdp>(); }

 private:
  int episode_ = 0;
};

ExperimentConfig open_point_goal() {
  ExperimentConfig c;
  c.env.name = "point_goal";
  c.env.params = {{"door_half_width", 2.0}};
  c.victim.path = "greedy_point";
  c.threat.epsilon = 0.05;
  return c;
}

ExperimentConfig small_attack(RegularizerKind kind) {
  ExperimentConfig c = open_point_goal();
  c.regularizer.kind = kind;
  c.ppo.batch_steps = 500;
  c.ppo.epochs = 2;
  c.ppo.minibatch = 100;
  c.run.total_steps = 1700;
  c.run.eval_episodes = 20;
  c.run.eval_every = 2;
  c.run.hidden = 16;
  c.run.seed = 9;
  c.mimic.sample_states = 64;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("success rate is one plus the mean adversary return") {
    ScheduleMdp mdp;
    const auto r = evaluate(mdp, noop_actions(mdp.action_spec()), 300, 1);
    CHECK(r.victim_failures == 180);
    CHECK(r.mean_adversary_return == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(r.asr == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r.asr == doctest::Approx(r.failure_fraction).epsilon(1e-15));
    CHECK(r.victim_mean_reward == doctest::Approx(0.4));
    ScheduleMdp again;
    CHECK_THROWS_AS(evaluate(again, noop_actions(again.action_spec()), 0, 1), std::invalid_argument);
  }

  TEST_CASE("indicator identity holds on real evaluations") {
    ExperimentConfig c = open_point_goal();
    c.threat.epsilon = 0.3;
    auto mdp = make_attack_mdp(c, load_victim(c));
    const auto r = evaluate(*mdp, random_actions(mdp->action_spec()), 200, 3);
    CHECK(r.asr == doctest::Approx(static_cast<double>(r.victim_failures) / 200.0).epsilon(1e-12));
  }

  TEST_CASE("a zero budget random attack is no attack") {
    ExperimentConfig c = open_point_goal();
    c.threat.epsilon = 0.0;
    const auto victim = load_victim(c);
    const auto base = random_attack_baseline(c, victim, 100, 4);
    auto mdp = make_attack_mdp(c, victim);
    const auto none = evaluate(*mdp, noop_actions(mdp->action_spec()), 100, 4);
    CHECK(base.victim_failures == none.victim_failures);
    CHECK(base.victim_mean_reward == none.victim_mean_reward);
    CHECK(base.asr <= 0.1);
  }

  TEST_CASE("random perturbations are centred") {
    const ActionSpec spec = ActionSpec::box(2, 0.05);
    const auto source = random_actions(spec);
    auto rng = make_rng(5);
    const std::vector<double> s = {0.0, 0.0};
    const int n = 100000;
    double sum[2] = {0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const auto a = source(s, rng);
      for (int j = 0; j < 2; ++j) {
        REQUIRE(std::abs(a[j]) <= 0.05);
        sum[j] += a[j];
      }
    }
    const double sigma = 0.05 / std::sqrt(3.0) / std::sqrt(static_cast<double>(n));
    for (double x : sum) CHECK(std::abs(x / n) < 3.0 * sigma);
  }

  TEST_CASE("idle opponents do not defeat competent victims") {
    ExperimentConfig gate;
    gate.env.name = "gate_run";
    gate.threat.kind = ThreatModelKind::kFixedVictim;
    gate.victim.path = "scripted_runner";
    auto mdp = make_attack_mdp(gate, load_victim(gate));
    CHECK(evaluate(*mdp, noop_actions(mdp->action_spec()), 100, 6).asr <= 0.1);

    ExperimentConfig point = open_point_goal();
    auto pm = make_attack_mdp(point, load_victim(point));
    CHECK(evaluate(*pm, noop_actions(pm->action_spec()), 100, 6).asr <= 0.1);
  }

  TEST_CASE("attack runs account for samples and leave the victim untouched") {
    for (auto kind : {RegularizerKind::kNone, RegularizerKind::kPC, RegularizerKind::kD}) {
      CAPTURE(regularizer_name(kind));
      ExperimentConfig c = small_attack(kind);
      c.br.enabled = kind == RegularizerKind::kPC;
      const AttackReport r = run_attack(c, load_victim(c));
      REQUIRE(r.error.empty());
      CHECK(r.samples == 1700);
      CHECK(r.iterations.size() == 4);
      CHECK(r.iterations.back().samples == 1700);
      CHECK(r.buffer_size == 1700);
      CHECK(r.victim_checksum_before == r.victim_checksum_after);
      REQUIRE(r.final_eval.has_value());
      CHECK(r.final_eval->asr >= 0.0);
      CHECK(r.final_eval->asr <= 1.0);
      CHECK(r.iterations[1].asr_eval.has_value());
      CHECK_FALSE(r.iterations[0].asr_eval.has_value());
      for (const auto& it : r.iterations) {
        CHECK(it.tau > 0.0);
        CHECK(it.tau <= 1.0);
      }
    }
  }

  TEST_CASE("attack runs are reproducible") {
    ExperimentConfig c = small_attack(RegularizerKind::kSC);
    c.run.collectors = 2;
    const auto a = run_attack(c, load_victim(c));
    const auto b = run_attack(c, load_victim(c));
    CHECK(metrics_csv(a.iterations) == metrics_csv(b.iterations));
    CHECK(a.adversary.snapshot() == b.adversary.snapshot());
    c.run.seed = 10;
    const auto other = run_attack(c, load_victim(c));
    CHECK(other.adversary.snapshot() != a.adversary.snapshot());
  }

  TEST_CASE("module errors are reported with the partial run") {
    ExperimentConfig c = small_attack(RegularizerKind::kPC);
    c.regularizer.k = 5000;  // more neighbours than states in the first batch
    const AttackReport r = run_attack(c, load_victim(c));
    CHECK_FALSE(r.error.empty());
    CHECK(r.iterations.empty());
  }

  TEST_CASE("a zero budget victim is the seeded initial policy") {
    ExperimentConfig c = open_point_goal();
    c.victim.train_steps = 0;
    c.victim.eval_episodes = 5;
    c.run.hidden = 16;
    c.run.seed = 77;
    const auto report = train_victim(c);
    CHECK(report.iterations == 0);
    CHECK(report.warning.empty());
    TaskMdp task(find_environment(victim_training_env(c)).make_single(c.env.params));
    const auto expect = initial_learner_policy(task, 16, 0.0, 77);
    CHECK(report.policy.snapshot() == expect.snapshot());
    CHECK(victim_training_env(c) == "point_goal_dense");
  }

  TEST_CASE("a reloaded victim checkpoint evaluates identically") {
    ExperimentConfig c = open_point_goal();
    c.victim.train_steps = 4096;
    c.victim.eval_episodes = 10;
    c.ppo.batch_steps = 1024;
    c.run.hidden = 16;
    const auto trained = train_victim(c);
    const auto path = std::filesystem::temp_directory_path() / "advpol_test_victim.json";
    save_policy(path, trained.policy);
    ExperimentConfig attack = c;
    attack.victim.path = path.string();
    const auto direct = std::make_shared<NetworkVictim>(trained.policy);
    const auto loaded = load_victim(attack);
    CHECK(loaded->checksum() == direct->checksum());
    auto m1 = make_attack_mdp(attack, direct);
    auto m2 = make_attack_mdp(attack, loaded);
    const auto e1 = evaluate(*m1, random_actions(m1->action_spec()), 50, 8);
    const auto e2 = evaluate(*m2, random_actions(m2->action_spec()), 50, 8);
    CHECK(e1.victim_mean_reward == e2.victim_mean_reward);
    CHECK(e1.victim_failures == e2.victim_failures);
    std::filesystem::remove(path);
  }
}
