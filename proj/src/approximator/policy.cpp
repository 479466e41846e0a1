#include "advpol/approximator/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpol {
namespace {

constexpr const char* kLayerNames[3] = {"l1", "l2", "head"};

// Orthogonal matrix (rows x cols) scaled by `gain`, written row-major.
void orthogonal_fill(std::span<double> out, std::size_t rows, std::size_t cols, double gain, Rng& rng) {
  const std::size_t big = std::max(rows, cols), small = std::min(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(big, small);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).template triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[i * cols + j] = gain * (rows >= cols ? q(i, j) : q(j, i));
    }
  }
}

}  // namespace

std::string network_name(Network net) {
  switch (net) {
    case Network::kPolicy: return "policy";
    case Network::kValueExt: return "value_ext";
    case Network::kValueInt: return "value_int";
  }
  return "unknown";
}

ActionDistribution BatchDistribution::at(std::size_t i) const {
  const auto col = params.col(static_cast<Eigen::Index>(i));
  if (kind == HeadKind::kCategorical) {
    std::vector<double> logits(col.data(), col.data() + col.size());
    return ActionDistribution::categorical_from_logits(logits);
  }
  std::vector<double> mean(col.data(), col.data() + col.size());
  std::vector<double> std(static_cast<std::size_t>(log_std.size()));
  for (std::size_t j = 0; j < std.size(); ++j) std[j] = std::exp(log_std(static_cast<Eigen::Index>(j)));
  return ActionDistribution::gaussian(std::move(mean), std::move(std));
}

void PolicyHandle::build_layout() {
  segments_.clear();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    segments_.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
    return segments_.size() - 1;
  };
  for (Network net : {Network::kPolicy, Network::kValueExt, Network::kValueInt}) {
    const auto n = static_cast<int>(net);
    const std::size_t in[3] = {input_dim_, hidden_, hidden_};
    const std::size_t out[3] = {hidden_, hidden_, network_outputs(net)};
    for (int layer = 0; layer < 3; ++layer) {
      const std::string prefix = network_name(net) + "." + kLayerNames[layer];
      seg_index_[n][layer][0] = add(prefix + ".weight", out[layer], in[layer]);
      seg_index_[n][layer][1] = add(prefix + ".bias", out[layer], 1);
    }
    if (net == Network::kPolicy && head_ == HeadKind::kGaussian) {
      log_std_segment_ = add("policy.log_std", output_dim_, 1);
    }
  }
  params_.assign(offset, 0.0);
}

PolicyHandle PolicyHandle::zeros(HeadKind head, std::size_t input_dim, std::size_t output_dim, std::size_t hidden) {
  if (input_dim == 0 || output_dim == 0 || hidden == 0) throw std::invalid_argument("PolicyHandle: zero dimension");
  if (head == HeadKind::kCategorical && output_dim < 2) {
    throw std::invalid_argument("PolicyHandle: categorical head needs at least two outputs");
  }
  PolicyHandle p;
  p.head_ = head;
  p.input_dim_ = input_dim;
  p.output_dim_ = output_dim;
  p.hidden_ = hidden;
  p.build_layout();
  return p;
}

PolicyHandle PolicyHandle::create(HeadKind head, std::size_t input_dim, std::size_t output_dim,
                                  const PolicyInit& init, Rng& rng) {
  PolicyHandle p = zeros(head, input_dim, output_dim, init.hidden);
  for (Network net : {Network::kPolicy, Network::kValueExt, Network::kValueInt}) {
    const auto n = static_cast<int>(net);
    for (int layer = 0; layer < 3; ++layer) {
      const auto& seg = p.segments_[p.seg_index_[n][layer][0]];
      double gain = init.hidden_gain;
      if (layer == 2) gain = net == Network::kPolicy ? init.policy_head_gain : init.value_head_gain;
      orthogonal_fill(std::span<double>(p.params_).subspan(seg.offset, seg.size()), seg.rows, seg.cols, gain, rng);
    }
  }
  if (head == HeadKind::kGaussian) {
    const auto& seg = p.segments_[p.log_std_segment_];
    std::fill_n(p.params_.begin() + static_cast<std::ptrdiff_t>(seg.offset), seg.size(),
                std::clamp(init.log_std_init, kLogStdMin, kLogStdMax));
  }
  return p;
}

const ParameterSegment& PolicyHandle::segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no parameter segment named " + std::string(name));
}

std::pair<std::size_t, std::size_t> PolicyHandle::network_range(Network net) const {
  const auto n = static_cast<int>(net);
  const std::size_t begin = segments_[seg_index_[n][0][0]].offset;
  std::size_t last = seg_index_[n][2][1];
  if (net == Network::kPolicy && head_ == HeadKind::kGaussian) last = log_std_segment_;
  return {begin, segments_[last].offset + segments_[last].size()};
}

void PolicyHandle::restore(std::span<const double> snapshot) {
  if (snapshot.size() != params_.size()) throw std::invalid_argument("PolicyHandle::restore: size mismatch");
  std::copy(snapshot.begin(), snapshot.end(), params_.begin());
}

void PolicyHandle::clamp_log_std() {
  if (head_ != HeadKind::kGaussian) return;
  const auto& seg = segments_[log_std_segment_];
  for (std::size_t i = 0; i < seg.size(); ++i) {
    params_[seg.offset + i] = std::clamp(params_[seg.offset + i], kLogStdMin, kLogStdMax);
  }
}

std::vector<double> PolicyHandle::log_std() const {
  if (head_ != HeadKind::kGaussian) return {};
  const auto& seg = segments_[log_std_segment_];
  std::vector<double> out(seg.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(params_[seg.offset + i], kLogStdMin, kLogStdMax);
  }
  return out;
}

ConstMatrixMap PolicyHandle::weights(Network net, int layer) const {
  const auto& seg = segments_[seg_index_[static_cast<int>(net)][layer][0]];
  return {params_.data() + seg.offset, static_cast<Eigen::Index>(seg.rows), static_cast<Eigen::Index>(seg.cols)};
}

std::span<const double> PolicyHandle::bias(Network net, int layer) const {
  const auto& seg = segments_[seg_index_[static_cast<int>(net)][layer][1]];
  return {params_.data() + seg.offset, seg.size()};
}

MlpActivations PolicyHandle::forward_network(Network net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_dim_) {
    throw std::invalid_argument("forward: state has " + std::to_string(inputs.rows()) + " coordinates, expected " +
                                std::to_string(input_dim_));
  }
  auto bias_vec = [&](int layer) {
    const auto b = bias(net, layer);
    return Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  };
  MlpActivations a;
  a.h1 = ((weights(net, 0) * inputs).colwise() + bias_vec(0)).array().tanh().matrix();
  a.h2 = ((weights(net, 1) * a.h1).colwise() + bias_vec(1)).array().tanh().matrix();
  a.out = (weights(net, 2) * a.h2).colwise() + bias_vec(2);
  return a;
}

BatchDistribution PolicyHandle::distribution_batch(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  BatchDistribution d;
  d.kind = head_;
  d.params = forward_network(Network::kPolicy, inputs).out;
  if (head_ == HeadKind::kGaussian) {
    const auto ls = log_std();
    d.log_std = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  }
  return d;
}

Eigen::VectorXd PolicyHandle::value_batch(Network net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  if (net == Network::kPolicy) throw std::invalid_argument("value_batch: policy network has no value output");
  return forward_network(net, inputs).out.row(0).transpose();
}

ActionDistribution PolicyHandle::distribution(std::span<const double> state) const {
  const Eigen::Map<const Eigen::MatrixXd> x(state.data(), static_cast<Eigen::Index>(state.size()), 1);
  return distribution_batch(x).at(0);
}

Evaluation PolicyHandle::forward(std::span<const double> state) const {
  const Eigen::Map<const Eigen::MatrixXd> x(state.data(), static_cast<Eigen::Index>(state.size()), 1);
  Evaluation e{distribution_batch(x).at(0), 0.0, 0.0};
  e.v_ext = forward_network(Network::kValueExt, x).out(0, 0);
  e.v_int = forward_network(Network::kValueInt, x).out(0, 0);
  return e;
}

}  // namespace advpol
