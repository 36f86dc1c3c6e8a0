#include "imgcl/clustering.hpp"

#include "imgcl/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

namespace imgcl {

namespace {

Matrix squared_distances(const Matrix& points, const Matrix& centroids) {
  Matrix d(points.rows(), centroids.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      d(i, c) = (points.row(i) - centroids.row(c)).squaredNorm();
    }
  }
  return d;
}

double assignment_cost(const Matrix& dist, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += dist(static_cast<Eigen::Index>(i), labels[i]);
  return total;
}

int nearest(const Matrix& dist, Eigen::Index i) {
  int best = 0;
  for (Eigen::Index c = 1; c < dist.cols(); ++c) {
    if (dist(i, c) < dist(i, best)) best = static_cast<int>(c);
  }
  return best;
}

// Feasible single moves and pairwise swaps until no strict improvement.
void improve(const Matrix& dist, std::vector<int>& labels, std::vector<std::size_t>& sizes,
             std::size_t min_size) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto k = static_cast<int>(dist.cols());
  constexpr double kEps = 1e-12;
  for (int pass = 0; pass < 50; ++pass) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int from = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(from)] <= min_size) continue;
      const int to = nearest(dist, i);
      if (to != from && dist(i, to) < dist(i, from) - kEps) {
        labels[static_cast<std::size_t>(i)] = to;
        --sizes[static_cast<std::size_t>(from)];
        ++sizes[static_cast<std::size_t>(to)];
        changed = true;
      }
    }
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        // a profitable swap needs a point whose single move was blocked
        if (sizes[static_cast<std::size_t>(a)] > min_size &&
            sizes[static_cast<std::size_t>(b)] > min_size) {
          continue;
        }
        // gain of moving a point from a to b, and from b to a
        std::vector<std::pair<double, Eigen::Index>> ab, ba;
        for (Eigen::Index i = 0; i < n; ++i) {
          const int y = labels[static_cast<std::size_t>(i)];
          if (y == a) ab.emplace_back(dist(i, a) - dist(i, b), i);
          if (y == b) ba.emplace_back(dist(i, b) - dist(i, a), i);
        }
        auto by_gain = [](const auto& l, const auto& r) {
          return l.first > r.first || (l.first == r.first && l.second < r.second);
        };
        std::sort(ab.begin(), ab.end(), by_gain);
        std::sort(ba.begin(), ba.end(), by_gain);
        for (std::size_t t = 0; t < std::min(ab.size(), ba.size()); ++t) {
          if (ab[t].first + ba[t].first <= kEps) break;
          labels[static_cast<std::size_t>(ab[t].second)] = b;
          labels[static_cast<std::size_t>(ba[t].second)] = a;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
}

std::vector<int> constrained_assign(const Matrix& dist, std::size_t min_size) {
  const auto n = static_cast<std::size_t>(dist.rows());
  const auto k = static_cast<std::size_t>(dist.cols());
  std::vector<int> labels(n, -1);
  std::vector<std::size_t> sizes(k, 0);

  if (min_size > 0) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        pairs.emplace_back(dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)), i, c);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::size_t deficit = min_size * k;
    for (const auto& [cost, i, c] : pairs) {
      if (deficit == 0) break;
      if (labels[i] >= 0 || sizes[c] >= min_size) continue;
      labels[i] = static_cast<int>(c);
      ++sizes[c];
      --deficit;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) {
      labels[i] = nearest(dist, static_cast<Eigen::Index>(i));
      ++sizes[static_cast<std::size_t>(labels[i])];
    }
  }
  improve(dist, labels, sizes, min_size);
  return labels;
}

Matrix cluster_means(const Matrix& points, const std::vector<int>& labels, const Matrix& previous) {
  Matrix sums = Matrix::Zero(previous.rows(), previous.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(previous.rows()), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  Matrix out = previous;
  for (Eigen::Index c = 0; c < out.rows(); ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      out.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

// Reseeds empty clusters at the point farthest from its assigned centroid.
bool repair_empty(const Matrix& points, Matrix& centroids, std::vector<int>& labels) {
  const auto k = static_cast<std::size_t>(centroids.rows());
  std::vector<std::size_t> counts(k, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  bool repaired = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    double best = -1.0;
    std::size_t far = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (counts[static_cast<std::size_t>(labels[i])] <= 1) continue;
      const double d = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(labels[i])).squaredNorm();
      if (d > best) {
        best = d;
        far = i;
      }
    }
    if (best < 0.0) continue;
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(c);
    counts[c] = 1;
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
    repaired = true;
  }
  return repaired;
}

// Best-improvement local search on the exact objective (centroids follow
// their clusters): single moves, plus pairwise swaps for N <= kSwapLimit.
// Works from cluster sums, so it only runs after Lloyd has converged.
constexpr std::size_t kSwapLimit = 256;

void refine(const Matrix& points, std::vector<int>& labels, std::size_t k, std::size_t min_size) {
  const auto n = static_cast<Eigen::Index>(points.rows());
  const std::size_t floor_size = std::max<std::size_t>(min_size, 1);
  const bool swaps = static_cast<std::size_t>(n) <= kSwapLimit;
  Matrix gram;
  if (swaps) gram = points * points.transpose();
  const Vector sq = points.rowwise().squaredNorm();

  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), points.cols());
  std::vector<double> count(k, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1.0;
  }
  constexpr double kEps = 1e-12;
  Matrix dots = points * sums.transpose();  // x_i . S_c, kept current below
  for (Eigen::Index step = 0; step < 10 * n; ++step) {
    const Vector sums_sq = sums.rowwise().squaredNorm();
    auto dist = [&](Eigen::Index i, int c) {
      const double m = count[static_cast<std::size_t>(c)];
      return sq(i) - 2.0 * dots(i, c) / m + sums_sq(c) / (m * m);
    };
    double best = -kEps;
    Eigen::Index bi = -1, bj = -1;
    int bto = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = labels[static_cast<std::size_t>(i)];
      const double na = count[static_cast<std::size_t>(a)];
      if (na <= static_cast<double>(floor_size)) continue;
      const double leave = na / (na - 1.0) * dist(i, a);
      for (int b = 0; b < static_cast<int>(k); ++b) {
        if (b == a) continue;
        const double nb = count[static_cast<std::size_t>(b)];
        const double delta = nb / (nb + 1.0) * dist(i, b) - leave;
        if (delta < best) {
          best = delta;
          bi = i;
          bto = b;
        }
      }
    }
    if (swaps) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const int a = labels[static_cast<std::size_t>(i)];
        const double na = count[static_cast<std::size_t>(a)];
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const int b = labels[static_cast<std::size_t>(j)];
          if (b == a) continue;
          const double nb = count[static_cast<std::size_t>(b)];
          // v = x_j - x_i moves into a and out of b
          const double vv = sq(i) + sq(j) - 2.0 * gram(i, j);
          const double sav = dots(j, a) - dots(i, a);
          const double sbv = dots(j, b) - dots(i, b);
          const double delta = -(2.0 * sav + vv) / na - (vv - 2.0 * sbv) / nb;
          if (delta < best) {
            best = delta;
            bi = i;
            bj = j;
            bto = -1;
          }
        }
      }
    }
    if (bi < 0) break;
    const int a = labels[static_cast<std::size_t>(bi)];
    if (bto >= 0) {
      const Vector xi = points * points.row(bi).transpose();
      dots.col(a) -= xi;
      dots.col(bto) += xi;
      sums.row(a) -= points.row(bi);
      sums.row(bto) += points.row(bi);
      count[static_cast<std::size_t>(a)] -= 1.0;
      count[static_cast<std::size_t>(bto)] += 1.0;
      labels[static_cast<std::size_t>(bi)] = bto;
    } else {
      const int b = labels[static_cast<std::size_t>(bj)];
      const Vector shift = gram.col(bj) - gram.col(bi);
      dots.col(a) += shift;
      dots.col(b) -= shift;
      sums.row(a) += points.row(bj) - points.row(bi);
      sums.row(b) += points.row(bi) - points.row(bj);
      labels[static_cast<std::size_t>(bi)] = b;
      labels[static_cast<std::size_t>(bj)] = a;
    }
  }
}

}  // namespace

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(centroids.rows()), 0);
  for (int y : labels) ++out[static_cast<std::size_t>(y)];
  return out;
}

std::size_t default_min_cluster_size(std::size_t n, std::size_t k) {
  return k == 0 ? 0 : n / (4 * k);
}

double clustering_objective(const Matrix& points, const Matrix& centroids,
                            const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += (points.row(static_cast<Eigen::Index>(i)) - centroids.row(labels[i])).squaredNorm();
  }
  return total / static_cast<double>(labels.size());
}

Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(k >= 1, "k must be >= 1");
  require(k <= n, "k must not exceed the number of points");

  Rng rng = make_rng(seed, "kmeans++");
  Matrix centroids(static_cast<Eigen::Index>(k), points.cols());
  std::size_t first = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  centroids.row(0) = points.row(static_cast<Eigen::Index>(first));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(0)).squaredNorm();
  }
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (!(total > 0.0)) {
      throw ValidationError("kmeans++ needs " + std::to_string(k) + " distinct points, found " +
                            std::to_string(c));
    }
    double target = uniform01(rng) * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) -
                               centroids.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centroids;
}

ClusterAssignment constrained_kmeans_from(const Matrix& points, Matrix initial_centroids,
                                          const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = static_cast<std::size_t>(initial_centroids.rows());
  require(k >= 1, "k must be >= 1");
  require(initial_centroids.cols() == points.cols(), "centroid width must match the points");
  if (k * options.min_size > n) {
    throw ValidationError("infeasible clustering: k * min_size = " +
                          std::to_string(k * options.min_size) + " exceeds N = " +
                          std::to_string(n));
  }

  ClusterAssignment out;
  out.min_size = options.min_size;
  out.centroids = std::move(initial_centroids);
  Matrix dist = squared_distances(points, out.centroids);
  out.labels = constrained_assign(dist, options.min_size);
  if (options.min_size == 0 && repair_empty(points, out.centroids, out.labels)) {
    dist = squared_distances(points, out.centroids);
  }
  out.centroids = cluster_means(points, out.labels, out.centroids);
  out.objective = clustering_objective(points, out.centroids, out.labels);
  out.objective_history.push_back(out.objective);
  out.iterations = 1;

  while (out.iterations < options.max_iter) {
    dist = squared_distances(points, out.centroids);
    auto candidate = constrained_assign(dist, options.min_size);
    // the previous labels are feasible; keep them unless the candidate is cheaper
    if (assignment_cost(dist, candidate) > assignment_cost(dist, out.labels)) candidate = out.labels;
    Matrix seeds = out.centroids;
    if (options.min_size == 0) repair_empty(points, seeds, candidate);
    Matrix centroids = cluster_means(points, candidate, seeds);
    const double objective = clustering_objective(points, centroids, candidate);
    ++out.iterations;
    const double decrease = out.objective - objective;
    out.labels = std::move(candidate);
    out.centroids = std::move(centroids);
    out.objective = objective;
    out.objective_history.push_back(out.objective);
    if (decrease <= options.tol) break;
  }

  std::vector<int> refined = out.labels;
  refine(points, refined, k, options.min_size);
  if (refined != out.labels) {
    Matrix centroids = cluster_means(points, refined, out.centroids);
    const double objective = clustering_objective(points, centroids, refined);
    if (objective < out.objective) {
      out.labels = std::move(refined);
      out.centroids = std::move(centroids);
      out.objective = objective;
      out.objective_history.push_back(objective);
      ++out.iterations;
    }
  }

  for (std::size_t size : out.sizes()) {
    if (size < options.min_size) {
      throw NumericalError("constrained k-means produced a cluster below min_size");
    }
  }
  return out;
}

ClusterAssignment constrained_kmeans(const Matrix& points, std::size_t k,
                                     const KMeansOptions& options) {
  require(k >= 1, "k must be >= 1");
  if (k * options.min_size > static_cast<std::size_t>(points.rows())) {
    throw ValidationError("infeasible clustering: k * min_size = " +
                          std::to_string(k * options.min_size) + " exceeds N = " +
                          std::to_string(points.rows()));
  }
  ClusterAssignment best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.n_init); ++r) {
    auto init = kmeanspp_init(points, k, substream_seed(options.seed, "kmeans.restart", r));
    auto run = constrained_kmeans_from(points, std::move(init), options);
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

}  // namespace imgcl
