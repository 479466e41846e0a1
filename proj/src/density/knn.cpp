#include "advpol/density/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace advpol {

void KnnHeap::offer(double d2) {
  if (heap_.size() < k_) {
    heap_.push_back(d2);
    std::push_heap(heap_.begin(), heap_.end());
  } else if (d2 < heap_.front()) {
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = d2;
    std::push_heap(heap_.begin(), heap_.end());
  }
}

const char* backend_name(KnnBackend b) {
  switch (b) {
    case KnnBackend::kSerial: return "serial";
    case KnnBackend::kParallel: return "parallel";
    case KnnBackend::kKdTree: return "kdtree";
  }
  return "unknown";
}

KdTree::KdTree(const StateMatrix& points, std::size_t begin, std::size_t end) : begin_(begin), end_(end) {
  if (begin > end || end > points.rows()) throw std::invalid_argument("KdTree: bad row range");
  index_.resize(end - begin);
  std::iota(index_.begin(), index_.end(), begin);
  if (!index_.empty()) build(points, 0, index_.size());
}

std::int64_t KdTree::build(const StateMatrix& points, std::size_t lo, std::size_t hi) {
  const auto id = static_cast<std::int64_t>(nodes_.size());
  nodes_.push_back({lo, hi});
  if (hi - lo <= kLeafSize) return id;
  const std::size_t dim = points.cols();
  std::size_t best = 0;
  double best_spread = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mn = points(index_[lo], d), mx = mn;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double v = points(index_[i], d);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mx - mn > best_spread) {
      best_spread = mx - mn;
      best = d;
    }
  }
  if (best_spread == 0.0) return id;  // all points coincide: keep as a leaf
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(lo), index_.begin() + static_cast<std::ptrdiff_t>(mid),
                   index_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::size_t a, std::size_t b) { return points(a, best) < points(b, best); });
  const double split = points(index_[mid], best);
  const std::int64_t left = build(points, lo, mid);
  const std::int64_t right = build(points, mid, hi);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.dim = best;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(const StateMatrix& points, const double* query, const double* inv_scale, KnnHeap& heap,
                    std::size_t exclude) const {
  if (!nodes_.empty()) search_node(0, points, query, inv_scale, heap, exclude);
}

void KdTree::search_node(std::int64_t id, const StateMatrix& points, const double* query, const double* inv_scale,
                         KnnHeap& heap, std::size_t exclude) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.left < 0) {
    const std::size_t dim = points.cols();
    for (std::size_t i = n.lo; i < n.hi; ++i) {
      const std::size_t row = index_[i];
      if (row == exclude) continue;
      heap.offer(squared_distance(points.row(row).data(), query, inv_scale, dim));
    }
    return;
  }
  // Left rows have coordinate <= split, right rows >= split.
  const double diff = (query[n.dim] - n.split) * inv_scale[n.dim];
  const bool go_left = query[n.dim] < n.split;
  search_node(go_left ? n.left : n.right, points, query, inv_scale, heap, exclude);
  if (!(diff * diff > heap.worst())) {
    search_node(go_left ? n.right : n.left, points, query, inv_scale, heap, exclude);
  }
}

void KdForest::sync(const StateMatrix& points) {
  if (points.rows() < indexed_) throw std::logic_error("KdForest: point set shrank; clear() first");
  if (points.rows() == indexed_) return;
  trees_.emplace_back(points, indexed_, points.rows());
  indexed_ = points.rows();
  while (trees_.size() >= 2 && trees_[trees_.size() - 2].size() <= 2 * trees_.back().size()) {
    const std::size_t begin = trees_[trees_.size() - 2].begin();
    trees_.pop_back();
    trees_.back() = KdTree(points, begin, indexed_);
  }
}

void KdForest::search(const StateMatrix& points, const double* query, const double* inv_scale, KnnHeap& heap,
                      std::size_t exclude) const {
  for (const auto& t : trees_) t.search(points, query, inv_scale, heap, exclude);
}

namespace {

void check_inputs(const StateMatrix& points, const StateMatrix& queries, std::span<const std::size_t> exclude,
                  std::size_t k, std::span<const double> inv_scale) {
  if (k == 0) throw std::invalid_argument("knn: K must be positive");
  if (!queries.empty() && queries.cols() != points.cols() && !points.empty()) {
    throw std::invalid_argument("knn: query width does not match the buffer");
  }
  if (inv_scale.size() != points.cols() && !points.empty()) throw std::invalid_argument("knn: scale width mismatch");
  if (!exclude.empty() && exclude.size() != queries.rows()) {
    throw std::invalid_argument("knn: exclusion list length mismatch");
  }
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const bool member = !exclude.empty() && exclude[i] < points.rows();
    const std::size_t eligible = points.rows() - (member ? 1 : 0);
    if (eligible < k) {
      throw std::invalid_argument("knn: need at least " + std::to_string(k) + " eligible points, found " +
                                  std::to_string(eligible));
    }
  }
}

std::size_t exclusion(std::span<const std::size_t> exclude, std::size_t i) {
  return exclude.empty() ? kNoExclusion : exclude[i];
}

double brute_one(const StateMatrix& points, const double* q, std::size_t exclude, std::size_t k,
                 const double* inv_scale) {
  KnnHeap heap(k);
  const std::size_t dim = points.cols();
  for (std::size_t j = 0; j < points.rows(); ++j) {
    if (j == exclude) continue;
    heap.offer(squared_distance(points.row(j).data(), q, inv_scale, dim));
  }
  return std::sqrt(heap.worst());
}

}  // namespace

std::vector<double> knn_brute_serial(const StateMatrix& points, const StateMatrix& queries,
                                     std::span<const std::size_t> exclude, std::size_t k,
                                     std::span<const double> inv_scale) {
  check_inputs(points, queries, exclude, k, inv_scale);
  std::vector<double> out(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out[i] = brute_one(points, queries.row(i).data(), exclusion(exclude, i), k, inv_scale.data());
  }
  return out;
}

std::vector<double> knn_brute_parallel(const StateMatrix& points, const StateMatrix& queries,
                                       std::span<const std::size_t> exclude, std::size_t k,
                                       std::span<const double> inv_scale) {
  check_inputs(points, queries, exclude, k, inv_scale);
  std::vector<double> out(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.rows()); ++i) {
    const auto u = static_cast<std::size_t>(i);
    KnnHeap heap(k);
    const std::size_t ex = exclusion(exclude, u);
    const double* q = queries.row(u).data();
    for (std::size_t j = 0; j < points.rows(); ++j) {
      if (j == ex) continue;
      heap.offer(squared_distance(points.row(j).data(), q, inv_scale.data(), points.cols()));
    }
    out[u] = std::sqrt(heap.worst());
  }
  return out;
}

std::vector<double> knn_forest(const KdForest& forest, const StateMatrix& points, const StateMatrix& queries,
                               std::span<const std::size_t> exclude, std::size_t k,
                               std::span<const double> inv_scale) {
  check_inputs(points, queries, exclude, k, inv_scale);
  if (forest.indexed() != points.rows()) throw std::logic_error("knn_forest: index is out of date");
  std::vector<double> out(queries.rows());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.rows()); ++i) {
    const auto u = static_cast<std::size_t>(i);
    KnnHeap heap(k);
    forest.search(points, queries.row(u).data(), inv_scale.data(), heap, exclusion(exclude, u));
    out[u] = std::sqrt(heap.worst());
  }
  return out;
}

}  // namespace advpol
