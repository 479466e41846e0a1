#pragma once

#include <span>
#include <vector>

#include "advpol/common.hpp"
#include "advpol/density/knn.hpp"

namespace advpol {

struct CoverBufferOptions {
  std::size_t capacity = 0;  // 0 = unbounded; otherwise reservoir-downsample above it
  bool normalize = true;     // standardize coordinates by the running statistics
  KnnBackend backend = KnnBackend::kKdTree;
  std::uint64_t seed = 0;    // reservoir sampling stream
};

/// Store of visited states with insertion-iteration tags, running
/// per-dimension statistics and exact K-nearest-neighbour queries.
class CoverBuffer {
 public:
  explicit CoverBuffer(std::size_t dim, CoverBufferOptions options = {});

  /// Appends `states` tagged with `iteration`. Returns, for each inserted
  /// state, its row after insertion (kNoExclusion if reservoir sampling
  /// dropped it). Running statistics include every inserted state.
  std::vector<std::size_t> insert(const StateMatrix& states, int iteration);

  std::size_t size() const { return points_.rows(); }
  std::size_t dim() const { return dim_; }
  const StateMatrix& points() const { return points_; }
  const std::vector<int>& tags() const { return tags_; }
  std::uint64_t total_inserted() const { return seen_; }
  const CoverBufferOptions& options() const { return options_; }
  void set_backend(KnnBackend backend);

  const std::vector<double>& mean() const { return mean_; }
  std::vector<double> stddev() const;
  /// Per-dimension multipliers applied before distances: 1/std when
  /// normalizing (1 for a degenerate dimension), else all ones.
  std::vector<double> inv_scale() const;

  /// K-th neighbour distance of each query row. `exclude[i]` is the row of
  /// query i inside this buffer (self-exclusion) or kNoExclusion. An empty
  /// `inv_scale` means this buffer's own.
  std::vector<double> knn_distances(const StateMatrix& queries, std::span<const std::size_t> exclude, std::size_t k,
                                    std::span<const double> inv_scale = {}) const;
  double knn_distance(std::span<const double> query, std::size_t k, std::size_t exclude = kNoExclusion) const;

 private:
  std::size_t dim_;
  CoverBufferOptions options_;
  StateMatrix points_;
  std::vector<int> tags_;
  std::vector<std::uint64_t> sequence_;  // global insertion number of each row
  std::uint64_t seen_ = 0;
  std::vector<double> mean_, m2_;
  Rng reservoir_rng_;
  KdForest forest_;
};

struct DensityEstimate {
  double distance = 0.0;
  double density = 0.0;  // 1 / (distance + c0)
};

std::vector<DensityEstimate> estimate_density(const CoverBuffer& buffer, const StateMatrix& states,
                                              std::span<const std::size_t> exclude, std::size_t k, double c0,
                                              std::span<const double> inv_scale = {});

/// Mean over stored states of ln(knn_distance + c0), each state excluding
/// itself. With `max_queries` > 0 only an evenly strided subset of at most
/// that many stored states is used as queries.
double entropy_estimate(const CoverBuffer& buffer, std::size_t k, double c0, std::size_t max_queries = 0);

}  // namespace advpol
