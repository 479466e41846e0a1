#include "advpol/density/cover_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace advpol {

CoverBuffer::CoverBuffer(std::size_t dim, CoverBufferOptions options)
    : dim_(dim),
      options_(options),
      points_(0, dim),
      mean_(dim, 0.0),
      m2_(dim, 0.0),
      reservoir_rng_(make_rng(options.seed, 0x72657376)) {
  if (dim == 0) throw std::invalid_argument("CoverBuffer: dimension must be positive");
}

void CoverBuffer::set_backend(KnnBackend backend) {
  options_.backend = backend;
  forest_.clear();
  if (backend == KnnBackend::kKdTree) forest_.sync(points_);
}

std::vector<std::size_t> CoverBuffer::insert(const StateMatrix& states, int iteration) {
  if (states.empty()) return {};
  if (states.cols() != dim_) throw std::invalid_argument("CoverBuffer::insert: state width mismatch");
  if (!tags_.empty() && iteration < tags_.back()) {
    throw std::invalid_argument("CoverBuffer::insert: iteration tags must be non-decreasing");
  }

  // Chan et al. merge of the batch moments into the running moments.
  const double nb = static_cast<double>(states.rows());
  const double na = static_cast<double>(seen_);
  for (std::size_t d = 0; d < dim_; ++d) {
    double bm = 0.0;
    for (std::size_t i = 0; i < states.rows(); ++i) bm += states(i, d);
    bm /= nb;
    double bm2 = 0.0;
    for (std::size_t i = 0; i < states.rows(); ++i) bm2 += (states(i, d) - bm) * (states(i, d) - bm);
    const double delta = bm - mean_[d];
    const double n = na + nb;
    mean_[d] += delta * nb / n;
    m2_[d] += bm2 + delta * delta * na * nb / n;
  }

  const std::uint64_t first_seq = seen_;
  bool replaced = false;
  for (std::size_t i = 0; i < states.rows(); ++i) {
    const std::uint64_t seq = seen_++;
    if (options_.capacity == 0 || points_.rows() < options_.capacity) {
      points_.append(states.row(i));
      tags_.push_back(iteration);
      sequence_.push_back(seq);
      continue;
    }
    const std::uint64_t j = std::uniform_int_distribution<std::uint64_t>(0, seq)(reservoir_rng_);
    if (j < options_.capacity) {
      auto row = points_.row(j);
      std::copy(states.row(i).begin(), states.row(i).end(), row.begin());
      tags_[j] = iteration;
      sequence_[j] = seq;
      replaced = true;
    }
  }

  if (replaced) {
    // Restore insertion order.
    std::vector<std::size_t> order(points_.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sequence_[a] < sequence_[b]; });
    StateMatrix sorted(points_.rows(), dim_);
    std::vector<int> tags(order.size());
    std::vector<std::uint64_t> seqs(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      std::copy(points_.row(order[r]).begin(), points_.row(order[r]).end(), sorted.row(r).begin());
      tags[r] = tags_[order[r]];
      seqs[r] = sequence_[order[r]];
    }
    points_ = std::move(sorted);
    tags_ = std::move(tags);
    sequence_ = std::move(seqs);
    forest_.clear();
  }
  if (options_.backend == KnnBackend::kKdTree) forest_.sync(points_);

  std::vector<std::size_t> rows(states.rows(), kNoExclusion);
  // Rows holding this batch are at the tail, in order.
  for (std::size_t r = points_.rows(); r-- > 0 && sequence_[r] >= first_seq;) {
    rows[sequence_[r] - first_seq] = r;
  }
  return rows;
}

std::vector<double> CoverBuffer::stddev() const {
  std::vector<double> sd(dim_, 0.0);
  if (seen_ == 0) return sd;
  for (std::size_t d = 0; d < dim_; ++d) sd[d] = std::sqrt(m2_[d] / static_cast<double>(seen_));
  return sd;
}

std::vector<double> CoverBuffer::inv_scale() const {
  std::vector<double> s(dim_, 1.0);
  if (!options_.normalize) return s;
  const auto sd = stddev();
  for (std::size_t d = 0; d < dim_; ++d) {
    if (sd[d] > 1e-12) s[d] = 1.0 / sd[d];
  }
  return s;
}

std::vector<double> CoverBuffer::knn_distances(const StateMatrix& queries, std::span<const std::size_t> exclude,
                                               std::size_t k, std::span<const double> inv_scale) const {
  std::vector<double> own;
  if (inv_scale.empty()) {
    own = this->inv_scale();
    inv_scale = own;
  }
  if (inv_scale.size() != dim_) throw std::invalid_argument("knn: scale width mismatch");
  switch (options_.backend) {
    case KnnBackend::kSerial: return knn_brute_serial(points_, queries, exclude, k, inv_scale);
    case KnnBackend::kParallel: return knn_brute_parallel(points_, queries, exclude, k, inv_scale);
    case KnnBackend::kKdTree: return knn_forest(forest_, points_, queries, exclude, k, inv_scale);
  }
  throw std::logic_error("unknown knn backend");
}

double CoverBuffer::knn_distance(std::span<const double> query, std::size_t k, std::size_t exclude) const {
  StateMatrix q(0, dim_);
  q.append(query);
  const std::size_t ex[1] = {exclude};
  return knn_distances(q, ex, k)[0];
}

std::vector<DensityEstimate> estimate_density(const CoverBuffer& buffer, const StateMatrix& states,
                                              std::span<const std::size_t> exclude, std::size_t k, double c0,
                                              std::span<const double> inv_scale) {
  if (!(c0 > 0.0)) throw std::invalid_argument("estimate_density: c0 must be positive");
  const auto dist = buffer.knn_distances(states, exclude, k, inv_scale);
  std::vector<DensityEstimate> out(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) out[i] = {dist[i], 1.0 / (dist[i] + c0)};
  return out;
}

double entropy_estimate(const CoverBuffer& buffer, std::size_t k, double c0, std::size_t max_queries) {
  const std::size_t n = buffer.size();
  if (n < k + 1) throw std::invalid_argument("entropy_estimate: need at least K+1 stored states");
  std::vector<std::size_t> rows;
  if (max_queries == 0 || max_queries >= n) {
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), 0);
  } else {
    for (std::size_t i = 0; i < max_queries; ++i) rows.push_back(i * n / max_queries);
  }
  StateMatrix q(rows.size(), buffer.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = buffer.points().row(rows[i]);
    std::copy(r.begin(), r.end(), q.row(i).begin());
  }
  const auto dist = buffer.knn_distances(q, rows, k);
  double sum = 0.0;
  for (double d : dist) sum += std::log(d + c0);
  return sum / static_cast<double>(dist.size());
}

}  // namespace advpol
