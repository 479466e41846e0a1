#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "advpol/common.hpp"

namespace advpol {

inline constexpr std::size_t kNoExclusion = std::numeric_limits<std::size_t>::max();

/// Sum over d of ((a_d - b_d) * inv_scale_d)^2. Every backend calls this,
/// so distances agree bit-for-bit across them.
inline double squared_distance(const double* a, const double* b, const double* inv_scale, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double t = (a[d] - b[d]) * inv_scale[d];
    s += t * t;
  }
  return s;
}

/// The k smallest squared distances seen so far (max-heap).
class KnnHeap {
 public:
  explicit KnnHeap(std::size_t k) : k_(k) { heap_.reserve(k); }
  void offer(double d2);
  bool full() const { return heap_.size() == k_; }
  /// Current k-th smallest, or +inf while fewer than k candidates were seen.
  double worst() const { return full() ? heap_.front() : std::numeric_limits<double>::infinity(); }
  std::size_t count() const { return heap_.size(); }

 private:
  std::size_t k_;
  std::vector<double> heap_;
};

enum class KnnBackend { kSerial, kParallel, kKdTree };

const char* backend_name(KnnBackend b);

/// Exact KD-tree over the rows [begin, end) of a point matrix. The tree keeps
/// only indices; the matrix is passed to every query. Pruning uses the same
/// scaled coordinates as the distance, so results equal an exhaustive scan.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  KdTree() = default;
  KdTree(const StateMatrix& points, std::size_t begin, std::size_t end);

  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }
  std::size_t size() const { return end_ - begin_; }

  void search(const StateMatrix& points, const double* query, const double* inv_scale, KnnHeap& heap,
              std::size_t exclude) const;

 private:
  struct Node {
    std::size_t lo, hi;   // range into index_
    std::size_t dim = 0;  // split dimension (internal nodes)
    double split = 0.0;
    std::int64_t left = -1, right = -1;
  };
  std::int64_t build(const StateMatrix& points, std::size_t lo, std::size_t hi);
  void search_node(std::int64_t node, const StateMatrix& points, const double* query, const double* inv_scale,
                   KnnHeap& heap, std::size_t exclude) const;

  std::size_t begin_ = 0, end_ = 0;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

/// Log-structured set of KD-trees over a growing point matrix: new rows get
/// their own tree, and trees of similar size are merged.
class KdForest {
 public:
  /// Indexes rows appended since the last call.
  void sync(const StateMatrix& points);
  void clear() { trees_.clear(); indexed_ = 0; }
  std::size_t indexed() const { return indexed_; }
  std::size_t tree_count() const { return trees_.size(); }
  void search(const StateMatrix& points, const double* query, const double* inv_scale, KnnHeap& heap,
              std::size_t exclude) const;

 private:
  std::vector<KdTree> trees_;
  std::size_t indexed_ = 0;
};

/// K-th nearest-neighbour distance of every query row against `points`.
/// `exclude[i]` names the row of `points` that query i must skip (or
/// kNoExclusion); an empty span excludes nothing. Throws if fewer than k
/// eligible points exist.
std::vector<double> knn_brute_serial(const StateMatrix& points, const StateMatrix& queries,
                                     std::span<const std::size_t> exclude, std::size_t k,
                                     std::span<const double> inv_scale);
std::vector<double> knn_brute_parallel(const StateMatrix& points, const StateMatrix& queries,
                                       std::span<const std::size_t> exclude, std::size_t k,
                                       std::span<const double> inv_scale);
std::vector<double> knn_forest(const KdForest& forest, const StateMatrix& points, const StateMatrix& queries,
                               std::span<const std::size_t> exclude, std::size_t k,
                               std::span<const double> inv_scale);

}  // namespace advpol
