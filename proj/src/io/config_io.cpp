#include "advpol/io/config_io.hpp"

#include <algorithm>
#include <set>

#include "advpol/io/files.hpp"
#include "advpol/mdp/catalog.hpp"

namespace advpol {
namespace {

using nlohmann::json;

// Reads one object level, remembering which keys were consumed.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Node child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Node(j_.contains(key) ? j_.at(key) : empty, join(key));
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(join(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void flag(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(join(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(join(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void count(const std::string& key, T& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        throw ConfigError(join(key) + ": expected a non-negative integer");
      }
      out = static_cast<T>(v->get<unsigned long long>());
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(join(key) + ": expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(join(key) + ": expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  const json* raw(const std::string& key) { return take(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(join(item.key()) + ": unknown key");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  const json* take(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ThreatModelKind parse_threat(const std::string& token) {
  if (token == "perturbation") return ThreatModelKind::kPerturbation;
  if (token == "fixed_victim") return ThreatModelKind::kFixedVictim;
  throw ConfigError("threat_model.kind: unknown threat model '" + token + "' (perturbation|fixed_victim)");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

KnnBackend parse_backend(const std::string& token) {
  for (KnnBackend b : {KnnBackend::kSerial, KnnBackend::kParallel, KnnBackend::kKdTree}) {
    if (token == backend_name(b)) return b;
  }
  throw ConfigError("density.backend: unknown backend '" + token + "'");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["env"] = {{"name", c.env.name}, {"params", c.env.params}};
  j["threat_model"] = {{"kind", threat_model_name(c.threat.kind)},
                       {"epsilon", c.threat.epsilon},
                       {"dense_reward", c.threat.dense_reward}};
  j["victim"] = {{"path", c.victim.path},
                 {"train_env", c.victim.train_env},
                 {"train_steps", c.victim.train_steps},
                 {"eval_episodes", c.victim.eval_episodes}};
  j["regularizer"] = {{"kind", regularizer_name(c.regularizer.kind)},
                      {"xi", c.regularizer.xi},
                      {"risk_target", c.regularizer.risk_target},
                      {"k", c.regularizer.k},
                      {"c0", c.regularizer.c0},
                      {"normalize_bonus", c.regularizer.normalize_bonus},
                      {"intrinsic_episodic", c.intrinsic_episodic},
                      {"mimic",
                       {{"steps", c.mimic.steps},
                        {"sample_states", c.mimic.sample_states},
                        {"learning_rate", c.mimic.learning_rate},
                        {"max_snapshots", c.mimic.max_snapshots},
                        {"snapshot_every", c.mimic.snapshot_every}}}};
  j["ppo"] = {{"clip_ratio", c.ppo.clip_ratio},
              {"gamma", c.ppo.gamma},
              {"gae_lambda", c.ppo.gae_lambda},
              {"epochs", c.ppo.epochs},
              {"minibatch", c.ppo.minibatch},
              {"learning_rate", c.ppo.learning_rate},
              {"value_coef", c.ppo.value_coef},
              {"entropy_coef", c.ppo.entropy_coef},
              {"normalize_advantages", c.ppo.normalize_advantages},
              {"batch_steps", c.ppo.batch_steps},
              {"max_grad_norm", c.ppo.max_grad_norm}};
  j["br"] = {{"enabled", c.br.enabled},
             {"eta", c.br.eta},
             {"constant_tau", c.br.constant_tau},
             {"lambda0", c.br.lambda0}};
  j["density"] = {{"capacity", c.density.capacity},
                  {"normalize", c.density.normalize},
                  {"backend", backend_name(c.density.backend)},
                  {"entropy_queries", c.density.entropy_queries}};
  j["run"] = {{"total_steps", c.run.total_steps},
              {"eval_episodes", c.run.eval_episodes},
              {"eval_every", c.run.eval_every},
              {"eval_deterministic", c.run.eval_deterministic},
              {"seed", c.run.seed},
              {"collectors", c.run.collectors},
              {"record_wall_clock", c.run.record_wall_clock},
              {"hidden", c.run.hidden}};
  return j;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  Node root(doc, "");

  Node env = root.child("env");
  env.text("name", c.env.name);
  if (const json* p = env.raw("params")) {
    if (!p->is_object()) throw ConfigError("env.params: expected an object");
    c.env.params = *p;
  }
  env.finish();
  const auto& entry = [&]() -> const EnvironmentEntry& {
    try {
      return find_environment(c.env.name);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("env.name: ") + e.what());
    }
  }();

  Node threat = root.child("threat_model");
  c.threat.kind = entry.two_player ? ThreatModelKind::kFixedVictim : ThreatModelKind::kPerturbation;
  if (root.has("threat_model") && threat.has("kind")) {
    std::string kind;
    threat.text("kind", kind);
    c.threat.kind = parse_threat(kind);
  }
  threat.number("epsilon", c.threat.epsilon);
  threat.flag("dense_reward", c.threat.dense_reward);
  threat.finish();

  Node victim = root.child("victim");
  if (entry.two_player) c.victim.path = "scripted_runner";
  victim.text("path", c.victim.path);
  victim.text("train_env", c.victim.train_env);
  victim.count("train_steps", c.victim.train_steps);
  victim.count("eval_episodes", c.victim.eval_episodes);
  victim.finish();

  Node reg = root.child("regularizer");
  if (const json* kind = reg.raw("kind")) {
    if (kind->is_array()) {
      throw ConfigError("regularizer.kind: combining several regularizers is not supported; pick one");
    }
    if (!kind->is_string()) throw ConfigError("regularizer.kind: expected a string");
    try {
      c.regularizer.kind = parse_regularizer(kind->get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("regularizer.kind: ") + e.what());
    }
  }
  reg.number("xi", c.regularizer.xi);
  reg.numbers("risk_target", c.regularizer.risk_target);
  reg.count("k", c.regularizer.k);
  reg.number("c0", c.regularizer.c0);
  reg.flag("normalize_bonus", c.regularizer.normalize_bonus);
  reg.flag("intrinsic_episodic", c.intrinsic_episodic);
  Node mimic = reg.child("mimic");
  mimic.count("steps", c.mimic.steps);
  mimic.count("sample_states", c.mimic.sample_states);
  mimic.number("learning_rate", c.mimic.learning_rate);
  mimic.count("max_snapshots", c.mimic.max_snapshots);
  mimic.count("snapshot_every", c.mimic.snapshot_every);
  mimic.finish();
  reg.finish();

  Node ppo = root.child("ppo");
  ppo.number("clip_ratio", c.ppo.clip_ratio);
  ppo.number("gamma", c.ppo.gamma);
  ppo.number("gae_lambda", c.ppo.gae_lambda);
  ppo.count("epochs", c.ppo.epochs);
  ppo.count("minibatch", c.ppo.minibatch);
  ppo.number("learning_rate", c.ppo.learning_rate);
  ppo.number("value_coef", c.ppo.value_coef);
  ppo.number("entropy_coef", c.ppo.entropy_coef);
  ppo.flag("normalize_advantages", c.ppo.normalize_advantages);
  ppo.count("batch_steps", c.ppo.batch_steps);
  ppo.number("max_grad_norm", c.ppo.max_grad_norm);
  ppo.finish();

  Node br = root.child("br");
  br.flag("enabled", c.br.enabled);
  br.number("eta", c.br.eta);
  br.number("constant_tau", c.br.constant_tau);
  br.number("lambda0", c.br.lambda0);
  br.finish();

  Node density = root.child("density");
  density.count("capacity", c.density.capacity);
  density.flag("normalize", c.density.normalize);
  std::string backend = backend_name(c.density.backend);
  density.text("backend", backend);
  c.density.backend = parse_backend(backend);
  density.count("entropy_queries", c.density.entropy_queries);
  density.finish();

  Node run = root.child("run");
  run.count("total_steps", c.run.total_steps);
  run.count("eval_episodes", c.run.eval_episodes);
  run.count("eval_every", c.run.eval_every);
  run.flag("eval_deterministic", c.run.eval_deterministic);
  run.count("seed", c.run.seed);
  run.count("collectors", c.run.collectors);
  run.flag("record_wall_clock", c.run.record_wall_clock);
  run.count("hidden", c.run.hidden);
  run.finish();

  root.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax error at line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      ": " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  write_file_atomic(path, config_to_json(config).dump(2) + "\n");
}

}  // namespace advpol
