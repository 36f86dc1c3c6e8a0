#include "imgcl/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace imgcl {

double CentralityScores::max() const { return *std::max_element(scores.begin(), scores.end()); }
double CentralityScores::min() const { return *std::min_element(scores.begin(), scores.end()); }

CentralityScores pagerank(const Graph& g, const PageRankParams& params) {
  require(params.damping > 0.0 && params.damping < 1.0, "pagerank damping must be in (0, 1)");
  require(params.tol > 0.0, "pagerank tol must be > 0");
  const std::size_t n = g.num_nodes();

  std::vector<double> inv_deg(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    if (g.degree(u) > 0) inv_deg[u] = 1.0 / static_cast<double>(g.degree(u));
  }

  CentralityScores out;
  out.damping = params.damping;
  out.scores.assign(n, 1.0);
  std::vector<double> scaled(n), next(n);
  double residual = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  while (residual > params.tol && iter < params.max_iter) {
    for (std::size_t u = 0; u < n; ++u) scaled[u] = out.scores[u] * inv_deg[u];
    residual = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double acc = 0.0;
      for (NodeId u : g.neighbors(v)) acc += scaled[u];
      next[v] = params.damping * acc + 1.0;
      residual = std::max(residual, std::abs(next[v] - out.scores[v]));
    }
    ++iter;
    // keep the iterate the residual was measured at, so the reported residual
    // is that of the returned scores
    if (residual <= params.tol) break;
    out.scores.swap(next);
  }
  out.residual = residual;
  out.iterations = iter;
  if (residual > params.tol) {
    throw NumericalError("pagerank did not converge in " + std::to_string(params.max_iter) +
                         " iterations (residual " + std::to_string(residual) + ")");
  }
  return out;
}

std::vector<double> npb_probabilities(const CentralityScores& scores,
                                      std::span<const double> class_rates,
                                      std::span<const int> pseudo_labels, double p_tau,
                                      bool invert) {
  require(p_tau > 0.0 && p_tau <= 1.0, "p_tau must be in (0, 1]");
  require(pseudo_labels.size() == scores.scores.size(), "one pseudo-label per node required");
  const std::size_t n = scores.scores.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  const double hi = scores.max();
  const double lo = scores.min();
  const double span = hi - lo;
  for (std::size_t v = 0; v < n; ++v) {
    const int j = pseudo_labels[v];
    require(j >= 0 && static_cast<std::size_t>(j) < class_rates.size(),
            "pseudo-label out of range of class rates");
    const double rate = class_rates[static_cast<std::size_t>(j)];
    require(rate >= 0.0, "class rates must be non-negative");
    double factor = 1.0;
    if (span > 0.0) {
      factor = invert ? (scores.scores[v] - lo) / span : (hi - scores.scores[v]) / span;
    }
    out[v] = std::min(factor * rate, p_tau);
  }
  return out;
}

std::vector<double> rescale_to_mean(std::span<const double> probs, double target_mean,
                                    int rounds) {
  require(target_mean > 0.0 && target_mean <= 1.0, "target mean must be in (0, 1]");
  std::vector<double> out(probs.begin(), probs.end());
  if (out.empty()) return out;
  const double base_sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (base_sum <= 0.0) return out;
  const double target_sum = target_mean * static_cast<double>(out.size());
  double scale = target_sum / base_sum;
  for (int r = 0; r < rounds; ++r) {
    double clamped_sum = 0.0;
    double free_sum = 0.0;
    for (double p : probs) {
      if (p * scale >= 1.0) {
        clamped_sum += 1.0;
      } else {
        free_sum += p;
      }
    }
    if (free_sum <= 0.0 || clamped_sum >= target_sum) break;
    scale = (target_sum - clamped_sum) / free_sum;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(probs[i] * scale, 0.0, 1.0);
  return out;
}

std::vector<double> centrality_sampling_probs(const CentralityScores& scores,
                                              std::span<const double> class_rates,
                                              std::span<const int> pseudo_labels, double p_tau,
                                              std::optional<double> keep_fraction, bool invert) {
  auto raw = npb_probabilities(scores, class_rates, pseudo_labels, p_tau, invert);
  if (!keep_fraction) return raw;
  return rescale_to_mean(raw, *keep_fraction);
}

}  // namespace imgcl
