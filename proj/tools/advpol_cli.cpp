// advpol: train victims, run attacks and evaluate them from a config file.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "advpol/approximator/checkpoint.hpp"
#include "advpol/io/config_io.hpp"
#include "advpol/io/files.hpp"
#include "advpol/io/outputs.hpp"

namespace fs = std::filesystem;
using namespace advpol;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string regularizer;
  std::string br;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Experiment config (JSON key tree)")->required();
  cmd->add_option("--seed", c.seed, "Override run.seed");
  cmd->add_option("--regularizer", c.regularizer, "Override regularizer.kind: none|sc|pc|r|d");
  cmd->add_option("--br", c.br, "Override br.enabled: on|off");
  cmd->add_option("--out", c.out, "Output directory (default: out)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = load_config(c.config_path);
  if (c.seed) cfg.run.seed = *c.seed;
  if (!c.regularizer.empty()) {
    try {
      cfg.regularizer.kind = parse_regularizer(c.regularizer);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--regularizer: ") + e.what());
    }
  }
  if (!c.br.empty()) {
    if (c.br != "on" && c.br != "off") throw ConfigError("--br: expected on or off, got '" + c.br + "'");
    cfg.br.enabled = c.br == "on";
  }
  cfg.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

int victim_train(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const fs::path out(c.out);
  write_config(out / "config.json", cfg);
  std::vector<IterationRecord> records;
  const VictimTrainReport r = train_victim(cfg, [&](const IterationRecord& rec) {
    records.push_back(rec);
    write_file_atomic(out / "metrics.csv", metrics_csv(records));
  });
  write_file_atomic(out / "metrics.csv", metrics_csv(records));
  save_policy(out / "victim.json", r.policy,
              {{"role", "victim"}, {"env", victim_training_env(cfg)}, {"seed", cfg.run.seed}});
  write_json(out / "victim_report.json", {{"training_env", victim_training_env(cfg)},
                                           {"eval_env", cfg.env.name},
                                           {"samples", r.samples},
                                           {"iterations", r.iterations},
                                           {"success_rate", round9(r.success_rate)},
                                           {"eval_episodes", r.eval_episodes},
                                           {"any_training_success", r.any_training_success},
                                           {"warning", r.warning}});
  if (!r.warning.empty()) std::cerr << "advpol: warning: " << r.warning << "\n";
  std::cout << "victim success_rate=" << format_decimal(r.success_rate) << " checkpoint=" << (out / "victim.json").string()
            << "\n";
  return 0;
}

int attack(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const fs::path out(c.out);
  const auto victim = load_victim(cfg);
  write_config(out / "config.json", cfg);
  std::vector<IterationRecord> records;
  const AttackReport report = run_attack(cfg, victim, [&](const IterationRecord& rec) {
    records.push_back(rec);
    write_file_atomic(out / "metrics.csv", metrics_csv(records));
  });
  write_outputs(report, cfg, out);
  if (!report.error.empty()) {
    std::cerr << "advpol: error: attack aborted: " << report.error << "\n";
    return 1;
  }
  std::cout << "attack regularizer=" << report.regularizer << " br=" << (report.br_enabled ? "on" : "off")
            << " asr=" << format_decimal(report.final_eval->asr)
            << " victim_mean_reward=" << format_decimal(report.final_eval->victim_mean_reward) << "\n";
  return 0;
}

int eval(const Common& c, const std::string& adversary_path, std::optional<int> episodes, bool deterministic) {
  const ExperimentConfig cfg = resolve(c);
  const auto victim = load_victim(cfg);
  auto mdp = make_attack_mdp(cfg, victim);
  const int n = episodes.value_or(cfg.run.eval_episodes);
  EvalResult r;
  PolicyHandle adversary;
  if (adversary_path.empty()) {
    r = evaluate(*mdp, noop_actions(mdp->action_spec()), n, cfg.run.seed, cfg.threat.dense_reward);
  } else {
    adversary = load_policy(adversary_path);
    if (adversary.input_dim() != mdp->state_dim()) {
      throw std::invalid_argument("adversary expects " + std::to_string(adversary.input_dim()) +
                                  " state coordinates, environment has " + std::to_string(mdp->state_dim()));
    }
    r = evaluate(*mdp, policy_actions(adversary, deterministic), n, cfg.run.seed, cfg.threat.dense_reward);
  }
  nlohmann::json j = eval_to_json(r);
  j["adversary"] = adversary_path.empty() ? "none" : adversary_path;
  write_json(fs::path(c.out) / "eval.json", j);
  std::cout << "eval episodes=" << r.episodes << " asr=" << format_decimal(r.asr)
            << " victim_mean_reward=" << format_decimal(r.victim_mean_reward) << "\n";
  return 0;
}

int baseline_random(const Common& c, std::optional<int> episodes) {
  const ExperimentConfig cfg = resolve(c);
  const EvalResult r =
      random_attack_baseline(cfg, load_victim(cfg), episodes.value_or(cfg.run.eval_episodes), cfg.run.seed);
  nlohmann::json j = eval_to_json(r);
  j["adversary"] = "random";
  write_json(fs::path(c.out) / "baseline.json", j);
  std::cout << "baseline-random episodes=" << r.episodes << " asr=" << format_decimal(r.asr)
            << " victim_mean_reward=" << format_decimal(r.victim_mean_reward) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial-policy lab: victim training, regularized attacks and evaluation"};
  app.require_subcommand(1);
  Common train_opts, attack_opts, eval_opts, base_opts;
  std::string adversary_path;
  std::optional<int> eval_episodes, base_episodes;
  bool deterministic = false;

  auto* train_cmd = app.add_subcommand("victim-train", "PPO-train a victim and save its checkpoint to <out>/victim.json");
  add_common(train_cmd, train_opts);
  auto* attack_cmd = app.add_subcommand("attack", "Train an adversary against the configured victim");
  add_common(attack_cmd, attack_opts);
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an adversary checkpoint (or no attack) against the victim");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--adversary", adversary_path, "Adversary checkpoint; omit to evaluate without attack");
  eval_cmd->add_option("--episodes", eval_episodes, "Override run.eval_episodes");
  eval_cmd->add_flag("--deterministic", deterministic, "Use the adversary's mode action");
  auto* base_cmd = app.add_subcommand("baseline-random", "Evaluate a uniformly random adversary");
  add_common(base_cmd, base_opts);
  base_cmd->add_option("--episodes", base_episodes, "Override run.eval_episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "advpol: error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train_cmd) return victim_train(train_opts);
    if (*attack_cmd) return attack(attack_opts);
    if (*eval_cmd) return eval(eval_opts, adversary_path, eval_episodes, deterministic);
    if (*base_cmd) return baseline_random(base_opts, base_episodes);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "advpol: error: " << msg << "\n";
    return 1;
  }
  return 1;
}
