#pragma once

#include "imgcl/graph.hpp"
#include "imgcl/synth.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace imgcl {

/// Governs which nodes enter each training stage.
struct SamplerSchedule {
  std::size_t total_epochs = 100;    // T
  std::size_t rebalance_every = 20;  // B
  double keep_fraction = 0.1;        // l
  double p_tau = 0.9;
  std::size_t current_epoch = 0;     // t

  /// Throws on invalid values; logs a warning when T/B exceeds 10.
  void validate() const;
  std::size_t num_stages() const;
};

struct ClassSamplingProbs {
  std::vector<double> probs;
  double q_exponent = 1.0;
};

/// p_k = N_k^q / sum_i N_i^q. q = 1 samples instances uniformly, q = 0 classes uniformly.
ClassSamplingProbs strategy_probs(std::span<const std::size_t> counts, double q);
inline ClassSamplingProbs strategy_probs(const ClassHistogram& hist, double q) {
  return strategy_probs(hist.counts(), q);
}

/// Progressively balanced mixture alpha * p(q=1) + (1 - alpha) * p(q=0).
ClassSamplingProbs pbs_probs(std::span<const std::size_t> counts, double alpha);
inline ClassSamplingProbs pbs_probs(const ClassHistogram& hist, double alpha) {
  return pbs_probs(hist.counts(), alpha);
}

/// 1 - t/T clamped to [0, 1] (1 when T = 0).
double alpha_at(const SamplerSchedule& schedule);

/// Independent Bernoulli draw per node. If nothing is selected the node with
/// the highest probability (lowest index on ties) is forced in.
NodeMask draw_mask(std::span<const double> per_node_probs, std::uint64_t seed);

}  // namespace imgcl
