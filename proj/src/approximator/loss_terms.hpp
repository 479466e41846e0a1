#pragma once

#include "advpol/approximator/losses.hpp"

namespace advpol::detail {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

struct LayerSegments {
  const ParameterSegment* weight[3] = {};
  const ParameterSegment* bias[3] = {};
  const ParameterSegment* log_std = nullptr;
};

LayerSegments layer_segments(const PolicyHandle& policy, Network net);

// Per-sample loss terms. Each writes d loss / d head-output into g_out and
// adds d loss / d log-std into g_log_std (Gaussian heads only).
double surrogate_term(HeadKind kind, std::size_t nout, const double* out, const double* log_std,
                      const double* action, double old_log_prob, double advantage, double clip_ratio,
                      double entropy_coef, double* g_out, double* g_log_std, double* ratio_out);
double mimic_term(HeadKind kind, std::size_t nout, const double* out, const double* log_std,
                  const std::vector<BatchDistribution>& targets, std::size_t sample, double* g_out,
                  double* g_log_std);

void validate(const PolicyHandle& policy, const LossSpec& spec);
Network network_of(const LossSpec& spec);
const StateMatrix& states_of(const LossSpec& spec);

}  // namespace advpol::detail
