#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advpol/approximator/distribution.hpp"
#include "advpol/common.hpp"

namespace advpol {

/// The three independent two-hidden-layer tanh networks held by a policy.
enum class Network { kPolicy = 0, kValueExt = 1, kValueInt = 2 };

struct ParameterSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct PolicyInit {
  std::size_t hidden = 64;
  double log_std_init = 0.0;
  double hidden_gain = 1.4142135623730951;
  double policy_head_gain = 0.01;
  double value_head_gain = 1.0;
};

struct Evaluation {
  ActionDistribution dist;
  double v_ext = 0.0;
  double v_int = 0.0;
};

/// Forward activations of one network over a batch (columns are samples).
struct MlpActivations {
  Eigen::MatrixXd h1, h2, out;
};

/// Batched head outputs: Gaussian means or categorical logits (out x N) plus
/// the state-independent clamped log-std for Gaussian heads.
struct BatchDistribution {
  HeadKind kind = HeadKind::kGaussian;
  Eigen::MatrixXd params;
  Eigen::VectorXd log_std;

  ActionDistribution at(std::size_t i) const;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;

/// Stochastic policy with extrinsic and intrinsic value networks, all stored
/// in one flat parameter vector with named segments (weights row-major).
class PolicyHandle {
 public:
  PolicyHandle() = default;
  static PolicyHandle create(HeadKind head, std::size_t input_dim, std::size_t output_dim, const PolicyInit& init,
                             Rng& rng);
  /// Builds a handle with the standard layout and zero-filled parameters.
  static PolicyHandle zeros(HeadKind head, std::size_t input_dim, std::size_t output_dim, std::size_t hidden);

  HeadKind head_kind() const { return head_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t hidden() const { return hidden_; }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  const std::vector<ParameterSegment>& segments() const { return segments_; }
  const ParameterSegment& segment(std::string_view name) const;
  /// [begin, end) of the parameters owned by one network (log-std counts as policy).
  std::pair<std::size_t, std::size_t> network_range(Network net) const;

  std::vector<double> snapshot() const { return params_; }
  void restore(std::span<const double> snapshot);

  /// Projects the Gaussian log-std parameters back into [kLogStdMin, kLogStdMax].
  void clamp_log_std();
  std::vector<double> log_std() const;

  Evaluation forward(std::span<const double> state) const;
  ActionDistribution distribution(std::span<const double> state) const;

  MlpActivations forward_network(Network net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;
  BatchDistribution distribution_batch(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;
  Eigen::VectorXd value_batch(Network net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;

  ConstMatrixMap weights(Network net, int layer) const;
  std::span<const double> bias(Network net, int layer) const;

 private:
  void build_layout();
  std::size_t network_outputs(Network net) const { return net == Network::kPolicy ? output_dim_ : 1; }

  HeadKind head_ = HeadKind::kGaussian;
  std::size_t input_dim_ = 0, output_dim_ = 0, hidden_ = 0;
  std::vector<double> params_;
  std::vector<ParameterSegment> segments_;
  // index into segments_: [net][layer][0 weight / 1 bias]
  std::size_t seg_index_[3][3][2] = {};
  std::size_t log_std_segment_ = 0;
};

/// Maps a sample matrix (rows = samples) as a column-per-sample Eigen view.
inline Eigen::Map<const Eigen::MatrixXd> as_columns(const StateMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.cols()), static_cast<Eigen::Index>(m.rows())};
}

std::string network_name(Network net);

}  // namespace advpol
