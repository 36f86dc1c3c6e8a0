#include "imgcl/theory.hpp"

#include "imgcl/common.hpp"
#include "imgcl/log.hpp"
#include "imgcl/rng.hpp"

#include <cmath>
#include <numbers>
#include <thread>

namespace imgcl::theory {

void GaussianMixSpec::validate() const {
  require(mu1 < mu2, "gaussian mixture needs mu1 < mu2");
  require(sigma > 0.0, "gaussian mixture needs sigma > 0");
  require(p_pos > 0.0 && p_pos < 1.0, "gaussian mixture needs 0 < p_pos < 1");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double bayes_boundary(const GaussianMixSpec& spec) {
  spec.validate();
  return spec.balanced_boundary() +
         spec.sigma * spec.sigma / (spec.mu2 - spec.mu1) * std::log(spec.p_pos / (1.0 - spec.p_pos));
}

double bayes_risk(const GaussianMixSpec& spec, double theta) {
  return spec.p_pos * normal_sf((theta - spec.mu1) / spec.sigma) +
         (1.0 - spec.p_pos) * normal_cdf((theta - spec.mu2) / spec.sigma);
}

double implied_positive_prior(const GaussianMixSpec& spec, double theta) {
  const double log_odds =
      (theta - spec.balanced_boundary()) * (spec.mu2 - spec.mu1) / (spec.sigma * spec.sigma);
  return 1.0 / (1.0 + std::exp(-log_odds));
}

double rebalance_step(const GaussianMixSpec& spec, double theta) {
  spec.validate();
  const double p1 = implied_positive_prior(spec, theta);
  const double p2 = 1.0 - p1;
  const double s = spec.sigma;
  const double a1 = (theta - spec.mu1) / s;
  const double a2 = (theta - spec.mu2) / s;

  // mass and first moment of each true class on each side of theta
  const double mass_left = p1 * normal_cdf(a1) + p2 * normal_cdf(a2);
  const double mass_right = p1 * normal_sf(a1) + p2 * normal_sf(a2);
  if (!(mass_left > 0.0) || !(mass_right > 0.0)) {
    throw NumericalError("rebalance step: all mass on one side of the boundary");
  }
  const double moment_left = p1 * (spec.mu1 * normal_cdf(a1) - s * normal_pdf(a1)) +
                             p2 * (spec.mu2 * normal_cdf(a2) - s * normal_pdf(a2));
  const double moment_right = p1 * (spec.mu1 * normal_sf(a1) + s * normal_pdf(a1)) +
                              p2 * (spec.mu2 * normal_sf(a2) + s * normal_pdf(a2));
  // equalizing the pseudo-class masses rescales each side uniformly, which
  // leaves the within-side conditional means unchanged
  return 0.5 * (moment_left / mass_left + moment_right / mass_right);
}

MonteCarloStep rebalance_step_monte_carlo(const GaussianMixSpec& spec, double theta,
                                          std::size_t samples, std::uint64_t seed,
                                          std::size_t shards) {
  spec.validate();
  shards = std::max<std::size_t>(1, shards);
  const double p1 = implied_positive_prior(spec, theta);

  struct Acc {
    double n[2] = {0, 0}, sum[2] = {0, 0}, sq[2] = {0, 0};
  };
  std::vector<Acc> acc(shards);
  {
    std::vector<std::jthread> workers;
    for (std::size_t sh = 0; sh < shards; ++sh) {
      workers.emplace_back([&, sh] {
        Rng rng = make_rng(seed, "theory.mc", sh);
        std::normal_distribution<double> noise(0.0, spec.sigma);
        const std::size_t count = samples / shards + (sh < samples % shards ? 1 : 0);
        Acc& a = acc[sh];
        for (std::size_t i = 0; i < count; ++i) {
          const double mean = uniform01(rng) < p1 ? spec.mu1 : spec.mu2;
          const double x = mean + noise(rng);
          const int side = x < theta ? 0 : 1;
          a.n[side] += 1.0;
          a.sum[side] += x;
          a.sq[side] += x * x;
        }
      });
    }
  }
  Acc total;
  for (const Acc& a : acc) {
    for (int s = 0; s < 2; ++s) {
      total.n[s] += a.n[s];
      total.sum[s] += a.sum[s];
      total.sq[s] += a.sq[s];
    }
  }
  if (total.n[0] < 2 || total.n[1] < 2) {
    throw NumericalError("monte carlo rebalance step: one side has too few samples");
  }
  MonteCarloStep out;
  double var_of_mean = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double mean = total.sum[s] / total.n[s];
    const double var = (total.sq[s] - total.n[s] * mean * mean) / (total.n[s] - 1.0);
    out.estimate += 0.5 * mean;
    var_of_mean += 0.25 * var / total.n[s];
  }
  out.std_error = std::sqrt(var_of_mean);
  return out;
}

double contraction_rate(double x) {
  require(x >= 0.0, "contraction_rate needs x >= 0");
  const double a = normal_pdf(x);
  const double phi = normal_cdf(x);
  const double tail = normal_sf(x);
  return 4.0 * (a * a + a * x * (phi - tail) - x * x * phi * tail);
}

BoundaryTrace run_trace(const GaussianMixSpec& spec, double theta0, std::size_t steps) {
  spec.validate();
  BoundaryTrace trace;
  trace.theta_star = spec.balanced_boundary();
  trace.in_regime =
      std::abs(theta0 - trace.theta_star) * (spec.mu2 - spec.mu1) <= 0.1 * spec.sigma * spec.sigma;
  if (!trace.in_regime) {
    spdlog::warn("run_trace: theta0 is outside the small-deviation regime of the convergence result");
  }
  trace.thetas.push_back(theta0);
  double theta = theta0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double next = rebalance_step(spec, theta);
    const double before = std::abs(theta - trace.theta_star);
    if (before > 1e-12) trace.ratios.push_back(std::abs(next - trace.theta_star) / before);
    trace.thetas.push_back(next);
    theta = next;
  }
  return trace;
}

}  // namespace imgcl::theory
