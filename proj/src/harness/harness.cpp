#include "advpol/harness/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "advpol/approximator/checkpoint.hpp"
#include "advpol/density/cover_buffer.hpp"
#include "advpol/mdp/catalog.hpp"
#include "advpol/mdp/gate_run.hpp"
#include "advpol/mdp/point_goal.hpp"

namespace advpol {
namespace {

constexpr std::uint64_t kPolicyInitStream = 0x696e6974;
constexpr std::uint64_t kEvalStream = 0x6576616c;
constexpr std::uint64_t kMimicStream = 0x6d696d;
constexpr std::uint64_t kReservoirStream = 0x726573;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

HeadKind head_for(const ActionSpec& spec) {
  return spec.is_discrete() ? HeadKind::kCategorical : HeadKind::kGaussian;
}

std::vector<RolloutCollector> make_collectors(const LearnerMdp& mdp, int count, std::uint64_t seed) {
  std::vector<RolloutCollector> out;
  for (int i = 0; i < count; ++i) out.emplace_back(mdp.clone(), seed, kCollectorStreamBase + static_cast<std::uint64_t>(i));
  return out;
}

double mean_episode_return(const RolloutBatch& b) {
  if (b.episodes.empty()) return nan();
  double s = 0.0;
  for (const auto& e : b.episodes) s += e.ext_return;
  return s / static_cast<double>(b.episodes.size());
}

// Intrinsic return of every episode that ended in this batch, carrying the
// unfinished tail of each collector across batches.
double mean_intrinsic_return(const RolloutBatch& b, std::map<std::uint32_t, double>& carry) {
  double total = 0.0;
  int count = 0;
  for (const auto& seg : b.segments) {
    double s = seg.continues ? carry[seg.source] : 0.0;
    for (std::size_t i = seg.begin; i < seg.end; ++i) s += b.int_rewards[i];
    if (seg.ends_episode) {
      total += s;
      ++count;
      carry[seg.source] = 0.0;
    } else {
      carry[seg.source] = s;
    }
  }
  return count == 0 ? nan() : total / count;
}

}  // namespace

PolicyHandle initial_learner_policy(const LearnerMdp& mdp, std::size_t hidden, double log_std, std::uint64_t seed) {
  PolicyInit init;
  init.hidden = hidden;
  init.log_std_init = log_std;
  auto rng = make_rng(seed, kPolicyInitStream);
  const ActionSpec spec = mdp.action_spec();
  return PolicyHandle::create(head_for(spec), mdp.state_dim(), spec.head_outputs(), init, rng);
}

std::string victim_training_env(const ExperimentConfig& config) {
  if (!config.victim.train_env.empty()) return config.victim.train_env;
  const std::string dense = config.env.name + "_dense";
  for (const auto& e : built_in_environments()) {
    if (e.name == dense) return dense;
  }
  return config.env.name;
}

std::shared_ptr<const VictimPolicy> load_victim(const ExperimentConfig& config) {
  const std::string& p = config.victim.path;
  if (p == "scripted_runner") return std::make_shared<ScriptedGateRunner>(true);
  if (p == "naive_runner") return std::make_shared<ScriptedGateRunner>(false);
  if (p == "greedy_point") {
    PointGoalParams params;
    const auto env = find_environment(config.env.name).make_single;
    if (!env) throw std::invalid_argument("victim.path: greedy_point needs a single-agent environment");
    const auto* pg = dynamic_cast<const PointGoal*>(env(config.env.params).get());
    if (pg == nullptr) throw std::invalid_argument("victim.path: greedy_point needs a point_goal environment");
    return std::make_shared<GreedyPointVictim>(pg->params().goal_x, pg->params().goal_y);
  }
  if (p.empty()) throw std::invalid_argument("victim.path: no victim given");
  return std::make_shared<NetworkVictim>(load_policy(p));
}

std::unique_ptr<LearnerMdp> make_attack_mdp(const ExperimentConfig& config,
                                            std::shared_ptr<const VictimPolicy> victim) {
  const auto& entry = find_environment(config.env.name);
  if (config.threat.kind == ThreatModelKind::kFixedVictim) {
    if (!entry.two_player) throw std::invalid_argument("fixed_victim threat model needs a two-player environment");
    return std::make_unique<FixedVictimMdp>(entry.make_two_player(config.env.params), std::move(victim));
  }
  if (entry.two_player) throw std::invalid_argument("perturbation threat model needs a single-agent environment");
  return std::make_unique<PerturbationMdp>(entry.make_single(config.env.params), std::move(victim),
                                           config.threat.epsilon, config.threat.dense_reward);
}

ActionSource policy_actions(const PolicyHandle& policy, bool deterministic) {
  return [&policy, deterministic](std::span<const double> s, Rng& rng) {
    const ActionDistribution d = policy.distribution(s);
    return deterministic ? d.mode() : d.sample(rng);
  };
}

ActionSource random_actions(const ActionSpec& spec) {
  return [spec](std::span<const double>, Rng& rng) {
    if (spec.is_discrete()) {
      return std::vector<double>{
          static_cast<double>(std::uniform_int_distribution<std::size_t>(0, spec.cardinality - 1)(rng))};
    }
    std::vector<double> a(spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) a[i] = std::uniform_real_distribution<double>(spec.low[i], spec.high[i])(rng);
    return a;
  };
}

ActionSource noop_actions(const ActionSpec& spec) {
  return [spec](std::span<const double>, Rng&) { return std::vector<double>(spec.width(), 0.0); };
}

EvalResult evaluate(LearnerMdp& mdp, const ActionSource& source, int episodes, std::uint64_t seed,
                    bool dense_reward) {
  if (episodes <= 0) throw std::invalid_argument("evaluate: episodes must be positive");
  auto seeds = make_rng(seed, kEvalStream);
  auto action_rng = make_rng(seed, kEvalStream + 1);
  EvalResult r;
  r.episodes = episodes;
  std::vector<double> rewards;
  double adv_total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> s = mdp.reset(seeds());
    double task = 0.0, adv = 0.0;
    bool success = false;
    for (;;) {
      const Transition t = mdp.step(source(s, action_rng));
      task += t.task_reward;
      adv += t.ext_reward;
      success = success || t.victim_succeeded;
      if (t.terminal || t.truncated) break;
      s = t.next_state;
    }
    rewards.push_back(task);
    adv_total += adv;
    if (!success) ++r.victim_failures;
  }
  const double n = static_cast<double>(episodes);
  double mean = 0.0;
  for (double x : rewards) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : rewards) var += (x - mean) * (x - mean);
  r.victim_mean_reward = mean;
  r.victim_std_reward = std::sqrt(var / n);
  r.mean_adversary_return = adv_total / n;
  r.failure_fraction = static_cast<double>(r.victim_failures) / n;
  r.asr = dense_reward ? r.failure_fraction : 1.0 + r.mean_adversary_return;
  return r;
}

EvalResult random_attack_baseline(const ExperimentConfig& config, std::shared_ptr<const VictimPolicy> victim,
                                  int episodes, std::uint64_t seed) {
  auto mdp = make_attack_mdp(config, std::move(victim));
  return evaluate(*mdp, random_actions(mdp->action_spec()), episodes, seed, config.threat.dense_reward);
}

AttackReport run_attack(const ExperimentConfig& config, std::shared_ptr<const VictimPolicy> victim,
                        const IterationCallback& on_iteration) {
  config.validate();
  AttackReport report;
  report.regularizer = regularizer_name(config.regularizer.kind);
  report.br_enabled = config.br.enabled;
  report.victim_checksum_before = victim->checksum();
  const auto start = std::chrono::steady_clock::now();
  try {
    auto mdp = make_attack_mdp(config, victim);
    const std::uint64_t seed = config.run.seed;
    const bool perturb = config.threat.kind == ThreatModelKind::kPerturbation;
    const double log_std = perturb ? std::log(std::max(config.threat.epsilon, 1e-12)) : 0.0;
    PolicyHandle policy = initial_learner_policy(*mdp, config.run.hidden, log_std, seed);
    Adam adam(policy.num_parameters(), AdamConfig{config.ppo.learning_rate, 0.9, 0.999, 1e-8, config.ppo.max_grad_norm});
    auto collectors = make_collectors(*mdp, config.run.collectors, seed);
    auto shuffle_rng = make_rng(seed, kShuffleStream);
    BrController br(config.br);

    const RegularizerSpec& reg = config.regularizer;
    const bool intrinsic = reg.kind != RegularizerKind::kNone;
    CoverBufferOptions bopt{config.density.capacity, config.density.normalize, config.density.backend,
                            seed ^ kReservoirStream};
    CoverBuffer union_buffer(mdp->state_dim(), bopt);

    const auto spaces = coverage_spaces(mdp->multi_agent(), mdp->victim_projection(), mdp->adversary_projection(),
                                        reg.xi, mdp->state_dim());
    // Union buffers per coverage space; single-agent runs reuse the full buffer.
    std::vector<std::unique_ptr<CoverBuffer>> space_buffers;
    const bool coverage = reg.kind == RegularizerKind::kSC || reg.kind == RegularizerKind::kPC;
    if (coverage && mdp->multi_agent()) {
      for (const auto& s : spaces) space_buffers.push_back(std::make_unique<CoverBuffer>(s.coords.size(), bopt));
    }
    std::vector<const CoverBuffer*> space_ptrs;
    if (coverage) {
      for (std::size_t j = 0; j < spaces.size(); ++j) {
        space_ptrs.push_back(mdp->multi_agent() ? space_buffers[j].get() : &union_buffer);
      }
    }

    std::vector<double> risk_target = reg.risk_target;
    if (reg.kind == RegularizerKind::kR && risk_target.empty()) risk_target = mdp->victim_reference_state();

    std::unique_ptr<MimicLearner> mimic;
    if (reg.kind == RegularizerKind::kD) mimic = std::make_unique<MimicLearner>(policy, config.mimic, seed ^ kMimicStream);

    BonusNormalizer normalizer(reg.normalize_bonus);
    std::map<std::uint32_t, double> int_carry;

    std::uint64_t t = 0;
    for (int k = 0; t < config.run.total_steps; ++k) {
      const std::size_t steps = static_cast<std::size_t>(
          std::min<std::uint64_t>(config.ppo.batch_steps, config.run.total_steps - t));
      RolloutBatch batch = collect_parallel(collectors, policy, steps);
      t += batch.size();

      const std::vector<std::size_t> rows = union_buffer.insert(batch.states, k);
      for (std::size_t j = 0; j < space_buffers.size(); ++j) {
        space_buffers[j]->insert(project_rows(batch.states, spaces[j].coords), k);
      }

      std::vector<double> bonus(batch.size(), 0.0);
      switch (reg.kind) {
        case RegularizerKind::kNone: break;
        case RegularizerKind::kSC: {
          std::vector<std::vector<double>> scales;
          for (const auto* b : space_ptrs) scales.push_back(b->inv_scale());
          bonus = bonus_sc(batch.states, spaces, scales, reg.k, reg.c0, config.density.backend);
          break;
        }
        case RegularizerKind::kPC: bonus = bonus_pc(batch.states, rows, spaces, space_ptrs, reg.k, reg.c0); break;
        case RegularizerKind::kR: bonus = bonus_r(batch.states, mdp->victim_projection(), risk_target); break;
        case RegularizerKind::kD:
          bonus = bonus_d(batch.states, policy, mimic->policy());
          mimic->add_snapshot(policy, k);
          mimic->update(union_buffer);
          break;
      }
      normalizer.apply(bonus);
      batch.int_rewards = std::move(bonus);

      prepare_advantages(batch, policy, config.ppo, {intrinsic, config.intrinsic_episodic});
      const double tau = br.temperature();
      IterationRecord rec;
      rec.iteration = k;
      rec.ppo = ppo_update(policy, adam, batch, tau, config.ppo, shuffle_rng, intrinsic);
      rec.samples = t;
      rec.episodes = static_cast<int>(batch.episodes.size());
      rec.mean_ext_return = mean_episode_return(batch);
      rec.mean_int_return = mean_intrinsic_return(batch, int_carry);
      rec.tau = tau;
      if (br.enabled() && !batch.episodes.empty()) br.update(rec.mean_ext_return);
      rec.lagrange_multiplier = br.lambda();
      rec.entropy_proxy = union_buffer.size() > reg.k
                              ? entropy_estimate(union_buffer, reg.k, reg.c0, config.density.entropy_queries)
                              : nan();
      if (config.run.eval_every > 0 && (k + 1) % config.run.eval_every == 0) {
        rec.asr_eval = evaluate(*mdp, policy_actions(policy, config.run.eval_deterministic), config.run.eval_episodes,
                                seed + 1 + static_cast<std::uint64_t>(k), config.threat.dense_reward)
                           .asr;
      }
      if (config.run.record_wall_clock) {
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      report.iterations.push_back(rec);
      report.samples = t;
      report.buffer_size = union_buffer.size();
      report.adversary = policy;
      if (on_iteration) on_iteration(rec);
    }
    report.adversary = policy;
    report.final_eval = evaluate(*mdp, policy_actions(policy, config.run.eval_deterministic), config.run.eval_episodes,
                                 seed ^ 0x66696e616cULL, config.threat.dense_reward);
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  report.victim_checksum_after = victim->checksum();
  return report;
}

VictimTrainReport train_victim(const ExperimentConfig& config, const IterationCallback& on_iteration) {
  config.validate();
  const auto& entry = find_environment(victim_training_env(config));
  if (entry.two_player) {
    throw std::invalid_argument("victim-train: " + entry.name +
                                " is two-player; its victim is scripted (victim.path = scripted_runner)");
  }
  const std::uint64_t seed = config.run.seed;
  TaskMdp task(entry.make_single(config.env.params));
  VictimTrainReport report;
  report.policy = initial_learner_policy(task, config.run.hidden, 0.0, seed);
  PolicyHandle& policy = report.policy;
  Adam adam(policy.num_parameters(), AdamConfig{config.ppo.learning_rate, 0.9, 0.999, 1e-8, config.ppo.max_grad_norm});
  auto collectors = make_collectors(task, config.run.collectors, seed);
  auto shuffle_rng = make_rng(seed, kShuffleStream);

  std::uint64_t t = 0;
  for (int k = 0; t < config.victim.train_steps; ++k) {
    const std::size_t steps = static_cast<std::size_t>(
        std::min<std::uint64_t>(config.ppo.batch_steps, config.victim.train_steps - t));
    RolloutBatch batch = collect_parallel(collectors, policy, steps);
    t += batch.size();
    for (std::uint8_t s : batch.victim_succeeded) report.any_training_success = report.any_training_success || s;
    prepare_advantages(batch, policy, config.ppo, {false, false});
    IterationRecord rec;
    rec.iteration = k;
    rec.ppo = ppo_update(policy, adam, batch, 0.0, config.ppo, shuffle_rng, false);
    rec.samples = t;
    rec.episodes = static_cast<int>(batch.episodes.size());
    rec.mean_ext_return = mean_episode_return(batch);
    rec.mean_int_return = nan();
    rec.entropy_proxy = nan();
    report.iterations = k + 1;
    if (on_iteration) on_iteration(rec);
  }
  report.samples = t;
  if (config.victim.train_steps > 0 && !report.any_training_success) {
    report.warning = "no successful episode during victim training";
  }

  // Unattacked success rate on the evaluation environment.
  ExperimentConfig eval_cfg = config;
  eval_cfg.threat.epsilon = 0.0;
  eval_cfg.threat.dense_reward = false;
  auto mdp = make_attack_mdp(eval_cfg, std::make_shared<NetworkVictim>(policy));
  const EvalResult r = evaluate(*mdp, noop_actions(mdp->action_spec()), config.victim.eval_episodes,
                                seed ^ 0x766963ULL, false);
  report.success_rate = 1.0 - r.failure_fraction;
  report.eval_episodes = r.episodes;
  return report;
}

}  // namespace advpol
