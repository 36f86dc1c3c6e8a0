#pragma once

#include "imgcl/graph.hpp"

#include <optional>
#include <span>
#include <vector>

namespace imgcl {

struct PageRankParams {
  double damping = 0.85;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
};

struct CentralityScores {
  std::vector<double> scores;
  double damping = 0.85;
  /// max-norm of the last update, i.e. of sigma - (damping * A D^-1 sigma + 1)
  double residual = 0.0;
  std::size_t iterations = 0;

  double max() const;
  double min() const;
};

/// Unnormalized PageRank: iterates sigma <- damping * A D^-1 sigma + 1 from the
/// all-ones vector until the max-norm change is <= tol. Isolated nodes keep
/// score 1. Throws NumericalError (with the residual) if max_iter is exhausted.
CentralityScores pagerank(const Graph& g, const PageRankParams& params = {});

/// Per-node inclusion weights from centrality and per-class rates:
///   p_v = min{ (s_max - s_v) / (s_max - s_min) * class_rate[label_v], p_tau }
/// With `invert` the factor becomes (s_v - s_min) / (s_max - s_min). When all
/// scores are equal the factor is 1.
std::vector<double> npb_probabilities(const CentralityScores& scores,
                                      std::span<const double> class_rates,
                                      std::span<const int> pseudo_labels, double p_tau,
                                      bool invert = false);

/// Multiplies `probs` by a common scale so that their mean is `target_mean`,
/// clamping to [0, 1]. The scale is re-estimated `rounds` times to compensate
/// for the clamping.
std::vector<double> rescale_to_mean(std::span<const double> probs, double target_mean,
                                    int rounds = 2);

/// npb_probabilities followed, when `keep_fraction` is set, by rescale_to_mean.
std::vector<double> centrality_sampling_probs(const CentralityScores& scores,
                                              std::span<const double> class_rates,
                                              std::span<const int> pseudo_labels, double p_tau,
                                              std::optional<double> keep_fraction = std::nullopt,
                                              bool invert = false);

}  // namespace imgcl
