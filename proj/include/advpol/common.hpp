#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advpol {

using Rng = std::mt19937_64;

/// Derives an independent generator for `stream` from a base seed. Streams
/// are stable across runs, so collectors and evaluators stay reproducible.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Dense row-major matrix of samples: one row per state (or action).
/// Column-major consumers (Eigen) can map it as a cols() x rows() matrix.
class StateMatrix {
 public:
  StateMatrix() = default;
  StateMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void append(std::span<const double> r) {
    if (cols_ == 0 && rows_ == 0) cols_ = r.size();
    if (r.size() != cols_) {
      throw std::invalid_argument("StateMatrix::append: row has " + std::to_string(r.size()) +
                                  " columns, expected " + std::to_string(cols_));
    }
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  void append_rows(const StateMatrix& other) {
    if (other.empty()) return;
    if (rows_ == 0 && cols_ == 0) cols_ = other.cols_;
    if (other.cols_ != cols_) throw std::invalid_argument("StateMatrix::append_rows: width mismatch");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    rows_ += other.rows_;
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Coordinate index list selecting a sub-space of the full state.
using Projection = std::vector<std::size_t>;

inline std::vector<double> project(std::span<const double> state, const Projection& proj) {
  std::vector<double> out;
  out.reserve(proj.size());
  for (std::size_t idx : proj) out.push_back(state[idx]);
  return out;
}

inline Projection identity_projection(std::size_t dim) {
  Projection p(dim);
  for (std::size_t i = 0; i < dim; ++i) p[i] = i;
  return p;
}

}  // namespace advpol
