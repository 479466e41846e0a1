#include "advpol/regularizers/regularizers.hpp"

#include <cmath>
#include <stdexcept>

#include "advpol/approximator/losses.hpp"

namespace advpol {

std::string regularizer_name(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kNone: return "none";
    case RegularizerKind::kSC: return "sc";
    case RegularizerKind::kPC: return "pc";
    case RegularizerKind::kR: return "r";
    case RegularizerKind::kD: return "d";
  }
  return "none";
}

RegularizerKind parse_regularizer(const std::string& token) {
  for (auto k : {RegularizerKind::kNone, RegularizerKind::kSC, RegularizerKind::kPC, RegularizerKind::kR,
                 RegularizerKind::kD}) {
    if (regularizer_name(k) == token) return k;
  }
  throw std::invalid_argument("unknown regularizer '" + token + "' (expected none, sc, pc, r or d)");
}

namespace {

double entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

std::vector<double> cover_sum(std::span<const double> d, std::span<const double> past) {
  if (d.size() != past.size()) throw std::invalid_argument("tabular policy cover: size mismatch");
  std::vector<double> rho(d.size());
  for (std::size_t s = 0; s < d.size(); ++s) rho[s] = past[s] + d[s];
  return rho;
}

}  // namespace

double tabular_sc_objective(std::span<const double> d) {
  double j = 0.0;
  for (double p : d) j += entropy_term(p);
  return j;
}

std::vector<double> tabular_sc_bonus(std::span<const double> d) {
  std::vector<double> b;
  b.reserve(d.size());
  for (double p : d) b.push_back(coverage_bonus(p));
  return b;
}

double tabular_pc_objective(std::span<const double> d, std::span<const double> past) {
  return tabular_sc_objective(cover_sum(d, past));
}

std::vector<double> tabular_pc_bonus(std::span<const double> d, std::span<const double> past) {
  return tabular_sc_bonus(cover_sum(d, past));
}

std::vector<CoverageSpace> coverage_spaces(bool multi_agent, const Projection& victim, const Projection& adversary,
                                           double xi, std::size_t state_dim) {
  if (!multi_agent) return {{identity_projection(state_dim), 1.0}};
  if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("xi must be in [0,1]");
  std::vector<CoverageSpace> out;
  if (1.0 - xi > 0.0) out.push_back({adversary, 1.0 - xi});
  if (xi > 0.0) out.push_back({victim, xi});
  return out;
}

StateMatrix project_rows(const StateMatrix& states, const Projection& coords) {
  StateMatrix out(states.rows(), coords.size());
  for (std::size_t i = 0; i < states.rows(); ++i) {
    for (std::size_t j = 0; j < coords.size(); ++j) out(i, j) = states(i, coords[j]);
  }
  return out;
}

namespace {

void accumulate(std::vector<double>& out, const std::vector<DensityEstimate>& est, double weight) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += weight * coverage_bonus(est[i].density);
  }
}

}  // namespace

std::vector<double> bonus_sc(const StateMatrix& states, const std::vector<CoverageSpace>& spaces,
                             const std::vector<std::vector<double>>& inv_scales, std::size_t k, double c0,
                             KnnBackend backend) {
  if (inv_scales.size() != spaces.size()) throw std::invalid_argument("bonus_sc: one scale vector per space");
  std::vector<double> out(states.rows(), 0.0);
  std::vector<std::size_t> self(states.rows());
  for (std::size_t i = 0; i < self.size(); ++i) self[i] = i;
  for (std::size_t j = 0; j < spaces.size(); ++j) {
    CoverBuffer batch(spaces[j].coords.size(), {0, true, backend, 0});
    const StateMatrix projected = project_rows(states, spaces[j].coords);
    batch.insert(projected, 0);
    accumulate(out, estimate_density(batch, projected, self, k, c0, inv_scales[j]), spaces[j].weight);
  }
  return out;
}

std::vector<double> bonus_pc(const StateMatrix& states, std::span<const std::size_t> rows,
                             const std::vector<CoverageSpace>& spaces, const std::vector<const CoverBuffer*>& buffers,
                             std::size_t k, double c0) {
  if (buffers.size() != spaces.size()) throw std::invalid_argument("bonus_pc: one buffer per space");
  std::vector<double> out(states.rows(), 0.0);
  for (std::size_t j = 0; j < spaces.size(); ++j) {
    if (buffers[j] == nullptr || buffers[j]->size() == 0) throw std::invalid_argument("bonus_pc: empty union buffer");
    const StateMatrix projected = project_rows(states, spaces[j].coords);
    accumulate(out, estimate_density(*buffers[j], projected, rows, k, c0), spaces[j].weight);
  }
  return out;
}

std::vector<double> bonus_r(const StateMatrix& states, const Projection& victim, std::span<const double> target) {
  if (target.size() != victim.size()) {
    throw std::invalid_argument("bonus_r: target has " + std::to_string(target.size()) +
                                " coordinates, victim space has " + std::to_string(victim.size()));
  }
  std::vector<double> out(states.rows());
  for (std::size_t i = 0; i < states.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < victim.size(); ++j) {
      const double d = states(i, victim[j]) - target[j];
      s += d * d;
    }
    out[i] = -std::sqrt(s);
  }
  return out;
}

std::vector<double> bonus_d(const StateMatrix& states, const PolicyHandle& adversary, const PolicyHandle& mimic) {
  if (adversary.head_kind() != mimic.head_kind() || adversary.output_dim() != mimic.output_dim()) {
    throw std::invalid_argument("bonus_d: adversary and mimic heads differ");
  }
  const auto x = as_columns(states);
  const BatchDistribution p = adversary.distribution_batch(x);
  const BatchDistribution q = mimic.distribution_batch(x);
  std::vector<double> out(states.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kl_divergence(p.at(i), q.at(i));
  return out;
}

MimicLearner::MimicLearner(PolicyHandle initial, MimicConfig config, std::uint64_t seed)
    : mimic_(std::move(initial)),
      config_(config),
      optimizer_(mimic_.num_parameters(), AdamConfig{config.learning_rate}),
      rng_(make_rng(seed, 0x6d696d6963)),
      stride_(std::max(1, config.snapshot_every)) {
  if (config_.max_snapshots < 2) throw std::invalid_argument("mimic: max_snapshots must be at least 2");
}

void MimicLearner::add_snapshot(const PolicyHandle& adversary, int iteration) {
  if (adversary.head_kind() != mimic_.head_kind() || adversary.num_parameters() != mimic_.num_parameters()) {
    throw std::invalid_argument("mimic: snapshot architecture differs from the mimic");
  }
  if (iteration % stride_ != 0) return;
  snapshots_.push_back(adversary);
  snapshot_iterations_.push_back(iteration);
  if (snapshots_.size() > config_.max_snapshots) {
    std::vector<PolicyHandle> kept;
    std::vector<int> kept_it;
    for (std::size_t i = 0; i < snapshots_.size(); i += 2) {
      kept.push_back(std::move(snapshots_[i]));
      kept_it.push_back(snapshot_iterations_[i]);
    }
    snapshots_ = std::move(kept);
    snapshot_iterations_ = std::move(kept_it);
    stride_ *= 2;
  }
}

std::vector<double> MimicLearner::update(const CoverBuffer& buffer) {
  if (buffer.size() == 0) throw std::invalid_argument("mimic: empty state buffer");
  StateMatrix states(config_.sample_states, buffer.dim());
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
  for (std::size_t i = 0; i < states.rows(); ++i) {
    const auto r = buffer.points().row(pick(rng_));
    std::copy(r.begin(), r.end(), states.row(i).begin());
  }
  return update_on(states);
}

std::vector<double> MimicLearner::update_on(const StateMatrix& states) {
  if (snapshots_.empty()) throw std::logic_error("mimic: no adversary snapshot stored");
  std::vector<double> losses;
  if (config_.steps <= 0) return losses;
  const auto x = as_columns(states);
  std::vector<BatchDistribution> targets;
  targets.reserve(snapshots_.size());
  for (const auto& s : snapshots_) targets.push_back(s.distribution_batch(x));
  const auto [pb, pe] = mimic_.network_range(Network::kPolicy);
  for (int step = 0; step < config_.steps; ++step) {
    const LossResult r = loss_and_gradient(mimic_, MimicKlLoss{&states, &targets});
    losses.push_back(r.loss);
    optimizer_.step(mimic_.parameters(), r.gradient, pb, pe);
    mimic_.clamp_log_std();
  }
  return losses;
}

void BonusNormalizer::apply(std::vector<double>& bonuses) {
  if (!enabled_ || bonuses.empty()) return;
  double sq = 0.0;
  for (double b : bonuses) sq += b * b;
  const double n = static_cast<double>(bonuses.size());
  mean_square_ = (count_ * mean_square_ + sq) / (count_ + n);
  count_ += n;
  const double s = scale();
  for (double& b : bonuses) b /= s;
}

double BonusNormalizer::scale() const { return std::max(std::sqrt(mean_square_), kFloor); }

}  // namespace advpol
