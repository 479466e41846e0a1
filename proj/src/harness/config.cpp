#include "advpol/harness/config.hpp"

#include <stdexcept>

#include "advpol/mdp/catalog.hpp"

namespace advpol {

std::string threat_model_name(ThreatModelKind kind) {
  return kind == ThreatModelKind::kPerturbation ? "perturbation" : "fixed_victim";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw std::invalid_argument(key + ": " + why); };
  const auto& entry = find_environment(env.name);
  if (entry.two_player && threat.kind != ThreatModelKind::kFixedVictim) {
    fail("threat_model.kind", "two-player environment " + env.name + " needs the fixed_victim threat model");
  }
  if (!entry.two_player && threat.kind != ThreatModelKind::kPerturbation) {
    fail("threat_model.kind", "single-agent environment " + env.name + " needs the perturbation threat model");
  }
  if (!(threat.epsilon >= 0.0)) fail("threat_model.epsilon", "must be non-negative");
  if (victim.eval_episodes <= 0) fail("victim.eval_episodes", "must be positive");
  if (!(regularizer.xi >= 0.0 && regularizer.xi <= 1.0)) fail("regularizer.xi", "must be in [0,1]");
  if (regularizer.k == 0) fail("regularizer.k", "must be positive");
  if (!(regularizer.c0 > 0.0)) fail("regularizer.c0", "must be positive");
  if (mimic.steps < 0) fail("regularizer.mimic.steps", "must be non-negative");
  if (mimic.sample_states == 0) fail("regularizer.mimic.sample_states", "must be positive");
  if (!(mimic.learning_rate >= 0.0)) fail("regularizer.mimic.learning_rate", "must be non-negative");
  if (mimic.max_snapshots < 2) fail("regularizer.mimic.max_snapshots", "must be at least 2");
  if (mimic.snapshot_every < 1) fail("regularizer.mimic.snapshot_every", "must be positive");
  ppo.validate();
  if (!(br.eta > 0.0)) fail("br.eta", "must be positive");
  if (!(br.constant_tau >= 0.0 && br.constant_tau <= 1.0)) fail("br.constant_tau", "must be in [0,1]");
  if (run.total_steps == 0) fail("run.total_steps", "must be positive");
  if (run.eval_episodes <= 0) fail("run.eval_episodes", "must be positive");
  if (run.eval_every < 0) fail("run.eval_every", "must be non-negative");
  if (run.collectors < 1) fail("run.collectors", "must be positive");
  if (run.hidden == 0) fail("run.hidden", "must be positive");
}

}  // namespace advpol
