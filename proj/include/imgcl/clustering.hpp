#pragma once

#include "imgcl/common.hpp"

#include <cstdint>
#include <vector>

namespace imgcl {

struct ClusterAssignment {
  Matrix centroids;          // K x d
  std::vector<int> labels;   // one cluster index per row
  double objective = 0.0;    // mean squared distance to the assigned centroid
  std::size_t min_size = 0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;  // after every completed iteration

  std::vector<std::size_t> sizes() const;
};

struct KMeansOptions {
  std::size_t min_size = 0;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-10;
  /// Independent k-means++ restarts; the lowest objective wins.
  std::size_t n_init = 10;
};

/// Mean squared distance of each row to its assigned centroid.
double clustering_objective(const Matrix& points, const Matrix& centroids,
                            const std::vector<int>& labels);

/// k-means++ seeding: the first centroid uniformly, the rest with probability
/// proportional to the squared distance to the nearest chosen one.
Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::uint64_t seed);

/// Size-constrained Lloyd iterations. Each assignment step fills every
/// cluster up to `min_size` with the globally cheapest point/cluster pairs,
/// sends the remaining points to their nearest centroid, then improves the
/// result with feasible single moves and pairwise swaps. A step is only
/// accepted when it does not raise the objective, so the objective history is
/// non-increasing. After convergence a best-improvement local search moves
/// single points (and swaps pairs, for small N) whenever that lowers the
/// objective with the centroids following their clusters.
ClusterAssignment constrained_kmeans(const Matrix& points, std::size_t k,
                                     const KMeansOptions& options);

/// Same iterations started from the given centroids (no restarts).
ClusterAssignment constrained_kmeans_from(const Matrix& points, Matrix initial_centroids,
                                          const KMeansOptions& options);

/// Default minimum cluster size floor(N / (4K)).
std::size_t default_min_cluster_size(std::size_t n, std::size_t k);

}  // namespace imgcl
