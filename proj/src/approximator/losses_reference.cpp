#include <cmath>
#include <vector>

#include "advpol/approximator/losses.hpp"
#include "loss_terms.hpp"

namespace advpol {

LossResult loss_and_gradient_reference(const PolicyHandle& policy, const LossSpec& spec) {
  detail::validate(policy, spec);
  const Network net = detail::network_of(spec);
  const auto seg = detail::layer_segments(policy, net);
  const StateMatrix& states = detail::states_of(spec);
  const std::size_t n = states.rows(), in = policy.input_dim(), h = policy.hidden();
  const std::size_t nout = net == Network::kPolicy ? policy.output_dim() : 1;
  const auto params = policy.parameters();
  const std::vector<double> log_std = policy.log_std();

  LossResult out;
  out.gradient.assign(policy.num_parameters(), 0.0);
  double* grad = out.gradient.data();
  std::vector<double> h1(h), h2(h), o(nout), g3(nout), g2(h), g1(h);
  double clipped = 0.0, kl = 0.0;

  auto dense = [&](const ParameterSegment* w, const ParameterSegment* b, const double* x, std::size_t cols,
                   std::vector<double>& y, bool activate) {
    for (std::size_t r = 0; r < w->rows; ++r) {
      double acc = params[b->offset + r];
      for (std::size_t c = 0; c < cols; ++c) acc += params[w->offset + r * cols + c] * x[c];
      y[r] = activate ? std::tanh(acc) : acc;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double* x = states.row(i).data();
    dense(seg.weight[0], seg.bias[0], x, in, h1, true);
    dense(seg.weight[1], seg.bias[1], h1.data(), h, h2, true);
    dense(seg.weight[2], seg.bias[2], h2.data(), h, o, false);

    double* g_log_std = seg.log_std ? grad + seg.log_std->offset : nullptr;
    if (const auto* s = std::get_if<SurrogateLoss>(&spec)) {
      double ratio = 1.0;
      out.loss += detail::surrogate_term(policy.head_kind(), nout, o.data(), log_std.data(),
                                         s->actions->row(i).data(), s->old_log_prob[i], s->advantage[i],
                                         s->clip_ratio, s->entropy_coef, g3.data(), g_log_std, &ratio);
      if (std::abs(ratio - 1.0) > s->clip_ratio) clipped += 1.0;
      kl += (ratio - 1.0) - std::log(ratio);
    } else if (const auto* v = std::get_if<ValueLoss>(&spec)) {
      const double diff = o[0] - v->targets[i];
      out.loss += v->coef * 0.5 * diff * diff;
      g3[0] = v->coef * diff;
    } else {
      const auto& m = std::get<MimicKlLoss>(spec);
      out.loss += detail::mimic_term(policy.head_kind(), nout, o.data(), log_std.data(), *m.targets, i, g3.data(),
                                     g_log_std);
    }

    for (std::size_t r = 0; r < nout; ++r) {
      grad[seg.bias[2]->offset + r] += g3[r];
      for (std::size_t c = 0; c < h; ++c) grad[seg.weight[2]->offset + r * h + c] += g3[r] * h2[c];
    }
    for (std::size_t c = 0; c < h; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < nout; ++r) acc += params[seg.weight[2]->offset + r * h + c] * g3[r];
      g2[c] = acc * (1.0 - h2[c] * h2[c]);
    }
    for (std::size_t r = 0; r < h; ++r) {
      grad[seg.bias[1]->offset + r] += g2[r];
      for (std::size_t c = 0; c < h; ++c) grad[seg.weight[1]->offset + r * h + c] += g2[r] * h1[c];
    }
    for (std::size_t c = 0; c < h; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < h; ++r) acc += params[seg.weight[1]->offset + r * h + c] * g2[r];
      g1[c] = acc * (1.0 - h1[c] * h1[c]);
    }
    for (std::size_t r = 0; r < h; ++r) {
      grad[seg.bias[0]->offset + r] += g1[r];
      for (std::size_t c = 0; c < in; ++c) grad[seg.weight[0]->offset + r * in + c] += g1[r] * x[c];
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

}  // namespace advpol
