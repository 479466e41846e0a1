#include "advpol/approximator/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "loss_terms.hpp"

namespace advpol {

double clipped_objective(double ratio, double advantage, double clip_ratio) {
  const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
  return std::min(ratio * advantage, clipped * advantage);
}

bool surrogate_clipped(double ratio, double advantage, double clip_ratio) {
  return (advantage > 0.0 && ratio > 1.0 + clip_ratio) || (advantage < 0.0 && ratio < 1.0 - clip_ratio);
}

namespace detail {

LayerSegments layer_segments(const PolicyHandle& policy, Network net) {
  LayerSegments s;
  const std::string prefix = network_name(net);
  const char* names[3] = {".l1", ".l2", ".head"};
  for (int l = 0; l < 3; ++l) {
    s.weight[l] = &policy.segment(prefix + names[l] + ".weight");
    s.bias[l] = &policy.segment(prefix + names[l] + ".bias");
  }
  if (net == Network::kPolicy && policy.head_kind() == HeadKind::kGaussian) {
    s.log_std = &policy.segment("policy.log_std");
  }
  return s;
}

double surrogate_term(HeadKind kind, std::size_t nout, const double* out, const double* log_std,
                      const double* action, double old_log_prob, double advantage, double clip_ratio,
                      double entropy_coef, double* g_out, double* g_log_std, double* ratio_out) {
  double lp = 0.0, entropy = 0.0;
  if (kind == HeadKind::kGaussian) {
    for (std::size_t j = 0; j < nout; ++j) {
      const double inv_std = std::exp(-log_std[j]);
      const double z = (action[j] - out[j]) * inv_std;
      lp += -0.5 * z * z - log_std[j] - kHalfLog2Pi;
      entropy += log_std[j] + 0.5 + kHalfLog2Pi;
    }
  } else {
    double mx = out[0];
    for (std::size_t j = 1; j < nout; ++j) mx = std::max(mx, out[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < nout; ++j) z += std::exp(out[j] - mx);
    const double lse = mx + std::log(z);
    const auto a = static_cast<std::size_t>(action[0]);
    lp = out[a] - lse;
    for (std::size_t j = 0; j < nout; ++j) {
      const double l = out[j] - lse;
      entropy -= std::exp(l) * l;
    }
  }
  const double ratio = std::exp(lp - old_log_prob);
  *ratio_out = ratio;
  const double loss = -clipped_objective(ratio, advantage, clip_ratio) - entropy_coef * entropy;

  // d loss / d log pi
  const double dlp = surrogate_clipped(ratio, advantage, clip_ratio) ? 0.0 : -ratio * advantage;
  if (kind == HeadKind::kGaussian) {
    for (std::size_t j = 0; j < nout; ++j) {
      const double inv_std = std::exp(-log_std[j]);
      const double z = (action[j] - out[j]) * inv_std;
      g_out[j] = dlp * z * inv_std;
      g_log_std[j] += dlp * (z * z - 1.0) - entropy_coef;
    }
  } else {
    double mx = out[0];
    for (std::size_t j = 1; j < nout; ++j) mx = std::max(mx, out[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < nout; ++j) z += std::exp(out[j] - mx);
    const double lse = mx + std::log(z);
    const auto a = static_cast<std::size_t>(action[0]);
    for (std::size_t j = 0; j < nout; ++j) {
      const double l = out[j] - lse;
      const double p = std::exp(l);
      const double dlp_dout = (j == a ? 1.0 : 0.0) - p;
      // dH/dl_j = -p_j (ln p_j + H)
      const double dh = -p * (l + entropy);
      g_out[j] = dlp * dlp_dout - entropy_coef * dh;
    }
  }
  return loss;
}

double mimic_term(HeadKind kind, std::size_t nout, const double* out, const double* log_std,
                  const std::vector<BatchDistribution>& targets, std::size_t sample, double* g_out,
                  double* g_log_std) {
  const double weight = 1.0 / static_cast<double>(targets.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < nout; ++j) g_out[j] = 0.0;
  if (kind == HeadKind::kGaussian) {
    for (const auto& t : targets) {
      const double* mt = t.params.col(static_cast<Eigen::Index>(sample)).data();
      for (std::size_t j = 0; j < nout; ++j) {
        const double lst = t.log_std(static_cast<Eigen::Index>(j));
        const double var_ratio = std::exp(2.0 * (log_std[j] - lst));
        const double inv_var_t = std::exp(-2.0 * lst);
        const double dm = out[j] - mt[j];
        loss += weight * ((lst - log_std[j]) + 0.5 * var_ratio + 0.5 * dm * dm * inv_var_t - 0.5);
        g_out[j] += weight * dm * inv_var_t;
        g_log_std[j] += weight * (var_ratio - 1.0);
      }
    }
    return loss;
  }
  double mx = out[0];
  for (std::size_t j = 1; j < nout; ++j) mx = std::max(mx, out[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < nout; ++j) z += std::exp(out[j] - mx);
  const double lse = mx + std::log(z);
  for (const auto& t : targets) {
    const double* lt = t.params.col(static_cast<Eigen::Index>(sample)).data();
    double tmx = lt[0];
    for (std::size_t j = 1; j < nout; ++j) tmx = std::max(tmx, lt[j]);
    double tz = 0.0;
    for (std::size_t j = 0; j < nout; ++j) tz += std::exp(lt[j] - tmx);
    const double tlse = tmx + std::log(tz);
    double kl = 0.0;
    for (std::size_t j = 0; j < nout; ++j) {
      const double l = out[j] - lse;
      kl += std::exp(l) * (l - (lt[j] - tlse));
    }
    for (std::size_t j = 0; j < nout; ++j) {
      const double l = out[j] - lse;
      g_out[j] += weight * std::exp(l) * (l - (lt[j] - tlse) - kl);
    }
    loss += weight * kl;
  }
  return loss;
}

void validate(const PolicyHandle& policy, const LossSpec& spec) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if (s.states == nullptr) throw std::invalid_argument("loss: states missing");
        if (s.states->cols() != policy.input_dim() && !s.states->empty()) {
          throw std::invalid_argument("loss: state width does not match the policy input");
        }
        const std::size_t n = s.states->rows();
        if constexpr (std::is_same_v<T, SurrogateLoss>) {
          if (s.actions == nullptr || s.actions->rows() != n || s.old_log_prob.size() != n ||
              s.advantage.size() != n) {
            throw std::invalid_argument("surrogate loss: batch length mismatch");
          }
          if (!(s.clip_ratio > 0.0 && s.clip_ratio < 1.0)) throw std::invalid_argument("clip_ratio must be in (0,1)");
        } else if constexpr (std::is_same_v<T, ValueLoss>) {
          if (s.net == Network::kPolicy) throw std::invalid_argument("value loss: policy network has no value output");
          if (s.targets.size() != n) throw std::invalid_argument("value loss: batch length mismatch");
        } else {
          if (s.targets == nullptr || s.targets->empty()) throw std::invalid_argument("mimic loss: no targets");
          for (const auto& t : *s.targets) {
            if (t.kind != policy.head_kind() || static_cast<std::size_t>(t.params.cols()) != n ||
                static_cast<std::size_t>(t.params.rows()) != policy.output_dim()) {
              throw std::invalid_argument("mimic loss: target shape mismatch");
            }
          }
        }
        if (n == 0) throw std::invalid_argument("loss: empty batch");
      },
      spec);
}

Network network_of(const LossSpec& spec) {
  if (const auto* v = std::get_if<ValueLoss>(&spec)) return v->net;
  return Network::kPolicy;
}

const StateMatrix& states_of(const LossSpec& spec) {
  return *std::visit([](const auto& s) { return s.states; }, spec);
}

}  // namespace detail

namespace {

using detail::LayerSegments;

struct ChunkResult {
  std::vector<double> grad;  // network range only
  double loss = 0.0;
  double clipped = 0.0;
  double kl = 0.0;
};

// Fills `g` (out x n) with per-sample d loss / d out and accumulates log-std gradient.
void head_gradients(const PolicyHandle& policy, const LossSpec& spec, std::size_t begin, const Eigen::MatrixXd& out,
                    const Eigen::VectorXd& log_std, Eigen::MatrixXd& g, double* g_log_std, ChunkResult& r) {
  const std::size_t n = static_cast<std::size_t>(out.cols());
  const std::size_t nout = static_cast<std::size_t>(out.rows());
  g.resize(out.rows(), out.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = begin + i;
    const double* o = out.col(static_cast<Eigen::Index>(i)).data();
    double* go = g.col(static_cast<Eigen::Index>(i)).data();
    if (const auto* s = std::get_if<SurrogateLoss>(&spec)) {
      double ratio = 1.0;
      r.loss += detail::surrogate_term(policy.head_kind(), nout, o, log_std.data(), s->actions->row(idx).data(),
                                       s->old_log_prob[idx], s->advantage[idx], s->clip_ratio, s->entropy_coef, go,
                                       g_log_std, &ratio);
      if (std::abs(ratio - 1.0) > s->clip_ratio) r.clipped += 1.0;
      r.kl += (ratio - 1.0) - std::log(ratio);
    } else if (const auto* v = std::get_if<ValueLoss>(&spec)) {
      const double diff = o[0] - v->targets[idx];
      r.loss += v->coef * 0.5 * diff * diff;
      go[0] = v->coef * diff;
    } else {
      const auto& m = std::get<MimicKlLoss>(spec);
      r.loss += detail::mimic_term(policy.head_kind(), nout, o, log_std.data(), *m.targets, idx, go, g_log_std);
    }
  }
}

void accumulate_matrix(const Eigen::MatrixXd& m, double* dst) {
  MatrixMap(dst, m.rows(), m.cols()) += m;
}

ChunkResult chunk_gradient(const PolicyHandle& policy, const LossSpec& spec, Network net, const LayerSegments& seg,
                           std::size_t range_begin, std::size_t range_size, std::size_t begin, std::size_t end,
                           bool with_gradient) {
  ChunkResult r;
  r.grad.assign(range_size, 0.0);
  const auto all = as_columns(detail::states_of(spec));
  const auto x = all.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
  const MlpActivations a = policy.forward_network(net, x);
  Eigen::VectorXd log_std;
  if (net == Network::kPolicy && policy.head_kind() == HeadKind::kGaussian) {
    const auto ls = policy.log_std();
    log_std = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  }
  auto at = [&](const ParameterSegment* s) { return r.grad.data() + (s->offset - range_begin); };
  Eigen::MatrixXd g3;
  head_gradients(policy, spec, begin, a.out, log_std, g3, seg.log_std ? at(seg.log_std) : nullptr, r);
  if (!with_gradient) return r;

  accumulate_matrix(g3 * a.h2.transpose(), at(seg.weight[2]));
  Eigen::Map<Eigen::VectorXd>(at(seg.bias[2]), g3.rows()) += g3.rowwise().sum();
  const Eigen::MatrixXd g2 =
      ((policy.weights(net, 2).transpose() * g3).array() * (1.0 - a.h2.array().square())).matrix();
  accumulate_matrix(g2 * a.h1.transpose(), at(seg.weight[1]));
  Eigen::Map<Eigen::VectorXd>(at(seg.bias[1]), g2.rows()) += g2.rowwise().sum();
  const Eigen::MatrixXd g1 =
      ((policy.weights(net, 1).transpose() * g2).array() * (1.0 - a.h1.array().square())).matrix();
  accumulate_matrix(g1 * x.transpose(), at(seg.weight[0]));
  Eigen::Map<Eigen::VectorXd>(at(seg.bias[0]), g1.rows()) += g1.rowwise().sum();
  return r;
}

LossResult run_loss(const PolicyHandle& policy, const LossSpec& spec, bool with_gradient) {
  detail::validate(policy, spec);
  const Network net = detail::network_of(spec);
  const auto seg = detail::layer_segments(policy, net);
  const auto [range_begin, range_end] = policy.network_range(net);
  const std::size_t n = detail::states_of(spec).rows();
  const std::size_t chunks = (n + kGradientChunk - 1) / kGradientChunk;

  std::vector<ChunkResult> parts(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kGradientChunk;
    parts[static_cast<std::size_t>(c)] = chunk_gradient(policy, spec, net, seg, range_begin, range_end - range_begin,
                                                        begin, std::min(n, begin + kGradientChunk), with_gradient);
  }

  LossResult out;
  if (with_gradient) out.gradient.assign(policy.num_parameters(), 0.0);
  double clipped = 0.0, kl = 0.0;
  for (const auto& p : parts) {
    out.loss += p.loss;
    clipped += p.clipped;
    kl += p.kl;
    if (with_gradient) {
      for (std::size_t i = 0; i < p.grad.size(); ++i) out.gradient[range_begin + i] += p.grad[i];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  for (double& g : out.gradient) g *= inv_n;
  if (std::holds_alternative<SurrogateLoss>(spec)) {
    out.clip_fraction = clipped * inv_n;
    out.approx_kl = kl * inv_n;
  }
  return out;
}

}  // namespace

LossResult loss_and_gradient(const PolicyHandle& policy, const LossSpec& spec) { return run_loss(policy, spec, true); }

LossResult evaluate_loss(const PolicyHandle& policy, const LossSpec& spec) { return run_loss(policy, spec, false); }

double loss_value(const PolicyHandle& policy, const LossSpec& spec) { return run_loss(policy, spec, false).loss; }

}  // namespace advpol
