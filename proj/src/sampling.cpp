#include "imgcl/sampling.hpp"

#include "imgcl/log.hpp"
#include "imgcl/rng.hpp"

#include <algorithm>
#include <cmath>

namespace imgcl {

void SamplerSchedule::validate() const {
  require(rebalance_every >= 1, "rebalance_every (B) must be >= 1");
  require(current_epoch <= total_epochs, "current epoch must satisfy 0 <= t <= T");
  require(keep_fraction > 0.0 && keep_fraction <= 1.0, "keep_fraction (l) must be in (0, 1]");
  require(p_tau > 0.0 && p_tau <= 1.0, "p_tau must be in (0, 1]");
  if (num_stages() > 10) {
    spdlog::warn("T/B = {} rebalance stages; at most 10 is recommended", num_stages());
  }
}

std::size_t SamplerSchedule::num_stages() const {
  return (total_epochs + rebalance_every - 1) / rebalance_every;
}

ClassSamplingProbs strategy_probs(std::span<const std::size_t> counts, double q) {
  require(q >= 0.0 && q <= 1.0, "q must be in [0, 1]");
  require(!counts.empty(), "need at least one class");
  ClassSamplingProbs out;
  out.q_exponent = q;
  out.probs.resize(counts.size());
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    require(counts[k] >= 1, "class counts must be >= 1");
    out.probs[k] = std::pow(static_cast<double>(counts[k]), q);
    total += out.probs[k];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

ClassSamplingProbs pbs_probs(std::span<const std::size_t> counts, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
  const auto instance = strategy_probs(counts, 1.0);
  const auto uniform = strategy_probs(counts, 0.0);
  ClassSamplingProbs out;
  out.q_exponent = alpha;
  out.probs.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out.probs[k] = alpha * instance.probs[k] + (1.0 - alpha) * uniform.probs[k];
  }
  return out;
}

double alpha_at(const SamplerSchedule& schedule) {
  if (schedule.total_epochs == 0) return 1.0;
  const double a = 1.0 - static_cast<double>(schedule.current_epoch) /
                             static_cast<double>(schedule.total_epochs);
  return std::clamp(a, 0.0, 1.0);
}

NodeMask draw_mask(std::span<const double> per_node_probs, std::uint64_t seed) {
  Rng rng = make_rng(seed, "mask");
  std::vector<bool> bits(per_node_probs.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double p = per_node_probs[i];
    require(p >= 0.0 && p <= 1.0, "mask probabilities must be in [0, 1]");
    bits[i] = uniform01(rng) < p;
    any = any || bits[i];
  }
  if (!any && !bits.empty()) {
    auto best = std::max_element(per_node_probs.begin(), per_node_probs.end());
    bits[static_cast<std::size_t>(best - per_node_probs.begin())] = true;
  }
  return NodeMask(std::move(bits));
}

}  // namespace imgcl
