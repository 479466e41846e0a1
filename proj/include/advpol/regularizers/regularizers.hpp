#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "advpol/approximator/adam.hpp"
#include "advpol/approximator/policy.hpp"
#include "advpol/density/cover_buffer.hpp"

namespace advpol {

enum class RegularizerKind { kNone, kSC, kPC, kR, kD };

/// "none", "sc", "pc", "r", "d".
std::string regularizer_name(RegularizerKind kind);
/// Throws std::invalid_argument naming the token.
RegularizerKind parse_regularizer(const std::string& token);

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::kNone;
  double xi = 0.5;                  // weight of the victim space in the mixed forms
  std::vector<double> risk_target;  // victim coordinates; empty = the victim's reference initial state
  std::size_t k = 10;
  double c0 = 1e-6;
  bool normalize_bonus = true;
};

/// -ln(density) - 1.
inline double coverage_bonus(double density);

/// Exact tabular forms over an enumerable state space. The state-coverage
/// objective is the entropy of d; the policy-cover objective is the entropy
/// of rho = past + d, where `past` sums the earlier visitation vectors.
double tabular_sc_objective(std::span<const double> d);
std::vector<double> tabular_sc_bonus(std::span<const double> d);
double tabular_pc_objective(std::span<const double> d, std::span<const double> past);
std::vector<double> tabular_pc_bonus(std::span<const double> d, std::span<const double> past);

/// A coordinate subset with its mixing weight.
struct CoverageSpace {
  Projection coords;
  double weight = 1.0;
};

/// Single-agent: the whole state with weight 1. Multi-agent: adversary
/// coordinates with weight 1 - xi and victim coordinates with weight xi;
/// zero-weight spaces are dropped.
std::vector<CoverageSpace> coverage_spaces(bool multi_agent, const Projection& victim, const Projection& adversary,
                                           double xi, std::size_t state_dim);

StateMatrix project_rows(const StateMatrix& states, const Projection& coords);

/// State-coverage bonus: density of each state among the batch itself
/// (self-excluded), per space, mixed by weight. `inv_scales[j]` standardizes
/// space j (typically from the union buffer's statistics).
std::vector<double> bonus_sc(const StateMatrix& states, const std::vector<CoverageSpace>& spaces,
                             const std::vector<std::vector<double>>& inv_scales, std::size_t k, double c0,
                             KnnBackend backend = KnnBackend::kKdTree);

/// Policy-cover bonus: density of each state among the union buffer of its
/// space. `rows[i]` is state i's row in the buffers (self-exclusion) or
/// kNoExclusion. `buffers[j]` holds states projected onto space j.
std::vector<double> bonus_pc(const StateMatrix& states, std::span<const std::size_t> rows,
                             const std::vector<CoverageSpace>& spaces, const std::vector<const CoverBuffer*>& buffers,
                             std::size_t k, double c0);

/// Risk bonus: -|| victim_coords(s) - target ||.
std::vector<double> bonus_r(const StateMatrix& states, const Projection& victim, std::span<const double> target);

/// Divergence bonus: KL(adversary(.|s) || mimic(.|s)).
std::vector<double> bonus_d(const StateMatrix& states, const PolicyHandle& adversary, const PolicyHandle& mimic);

struct MimicConfig {
  int steps = 5;
  std::size_t sample_states = 512;
  double learning_rate = 1e-3;
  std::size_t max_snapshots = 32;
  int snapshot_every = 1;
};

/// Imitates the average of stored adversary snapshots by minimizing
/// KL(mimic || snapshot) averaged over snapshots and sampled states.
class MimicLearner {
 public:
  MimicLearner(PolicyHandle initial, MimicConfig config, std::uint64_t seed);

  /// Stores the adversary every `snapshot_every` iterations. Above the cap
  /// every second snapshot is dropped and the stride doubles, keeping the
  /// store evenly spread over time.
  void add_snapshot(const PolicyHandle& adversary, int iteration);
  /// Runs the configured steps on states sampled uniformly from `buffer`.
  /// Returns the loss before each step. Throws if no snapshot is stored.
  std::vector<double> update(const CoverBuffer& buffer);
  /// Same on explicit states.
  std::vector<double> update_on(const StateMatrix& states);

  const PolicyHandle& policy() const { return mimic_; }
  const std::vector<PolicyHandle>& snapshots() const { return snapshots_; }
  const std::vector<int>& snapshot_iterations() const { return snapshot_iterations_; }

 private:
  PolicyHandle mimic_;
  MimicConfig config_;
  Adam optimizer_;
  Rng rng_;
  std::vector<PolicyHandle> snapshots_;
  std::vector<int> snapshot_iterations_;
  int stride_;
};

/// Divides bonuses by the running root-mean-square of all bonuses seen
/// (no centering). Disabled normalizers are the identity.
class BonusNormalizer {
 public:
  explicit BonusNormalizer(bool enabled = true) : enabled_(enabled) {}
  void apply(std::vector<double>& bonuses);
  double scale() const;
  bool enabled() const { return enabled_; }

  static constexpr double kFloor = 1e-8;

 private:
  bool enabled_;
  double count_ = 0.0;
  double mean_square_ = 0.0;
};

inline double coverage_bonus(double density) { return -std::log(density) - 1.0; }

}  // namespace advpol
