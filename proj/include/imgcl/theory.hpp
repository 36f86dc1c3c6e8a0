#pragma once

#include <cstdint>
#include <vector>

namespace imgcl::theory {

/// Two equal-variance Gaussians: class +1 ~ N(mu1, sigma^2) with prior p_pos,
/// class -1 ~ N(mu2, sigma^2), mu1 < mu2. Points left of a threshold are
/// labeled +1.
struct GaussianMixSpec {
  double mu1 = 0.0;
  double mu2 = 1.0;
  double sigma = 1.0;
  double p_pos = 0.5;

  void validate() const;
  double balanced_boundary() const { return 0.5 * (mu1 + mu2); }
};

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_sf(double x);
double normal_pdf(double x);

/// Bayes-optimal threshold (mu1+mu2)/2 + sigma^2/(mu2-mu1) * log(p_pos/(1-p_pos)).
double bayes_boundary(const GaussianMixSpec& spec);

/// Misclassification risk of thresholding at `theta`.
double bayes_risk(const GaussianMixSpec& spec, double theta);

/// Prior of class +1 for which `theta` is the Bayes boundary, i.e. odds
/// exp((theta - theta*) (mu2 - mu1) / sigma^2).
double implied_positive_prior(const GaussianMixSpec& spec, double theta);

/// One population-level rebalancing step. The current training population is
/// the mixture whose Bayes boundary is `theta`; it is split at `theta` into
/// pseudo-classes, the two sides are reweighted to equal mass, and the next
/// boundary is the midpoint of the two sides' conditional means, computed
/// from exact truncated-Gaussian moments. Throws NumericalError when one side
/// carries no mass.
double rebalance_step(const GaussianMixSpec& spec, double theta);

struct MonteCarloStep {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sampling version of rebalance_step, sharded across `shards` threads with
/// per-shard seeds and an order-fixed merge.
MonteCarloStep rebalance_step_monte_carlo(const GaussianMixSpec& spec, double theta,
                                          std::size_t samples, std::uint64_t seed,
                                          std::size_t shards = 4);

/// C(x) = 4 (A^2 + A x (2 Phi(x) - 1) - x^2 Phi(x) (1 - Phi(x))),
/// A = exp(-x^2/2)/sqrt(2 pi), x = (mu2 - mu1)/(2 sigma).
double contraction_rate(double x);

struct BoundaryTrace {
  std::vector<double> thetas;
  double theta_star = 0.0;
  /// |theta_{t+1} - theta*| / |theta_t - theta*| for steps with |theta_t - theta*| > 1e-12.
  std::vector<double> ratios;
  /// |theta0 - theta*| (mu2 - mu1) <= 0.1 sigma^2
  bool in_regime = true;
};

BoundaryTrace run_trace(const GaussianMixSpec& spec, double theta0, std::size_t steps);

}  // namespace imgcl::theory
