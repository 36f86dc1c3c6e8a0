#pragma once

#include "imgcl/graph.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace imgcl {

/// Per-class node counts, sorted descending (class 0 is the head class).
class ClassHistogram {
 public:
  ClassHistogram() = default;
  /// Throws ValidationError unless counts are non-empty, positive and non-increasing.
  explicit ClassHistogram(std::vector<std::size_t> counts);

  std::size_t num_classes() const { return counts_.size(); }
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t operator[](std::size_t k) const { return counts_[k]; }
  std::vector<double> frequencies() const;
  double imbalance_ratio() const {
    return static_cast<double>(counts_.front()) / static_cast<double>(counts_.back());
  }

  friend bool operator==(const ClassHistogram&, const ClassHistogram&) = default;

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// Counts per label value in [0, num_classes); not necessarily sorted.
std::vector<std::size_t> count_labels(std::span<const int> labels, int num_classes);

enum class ImbalanceKind { Exp, Pareto };

std::string to_string(ImbalanceKind kind);
ImbalanceKind imbalance_kind_from_string(const std::string& name);

struct ImbalanceSpec {
  ImbalanceKind kind = ImbalanceKind::Exp;
  double factor = 100.0;
  int num_classes = 10;
  std::size_t head_size = 600;

  void validate() const;
};

/// Exp:    N_k = round(N_1 * factor^(-(k-1)/(K-1)))  (N_1/N_K = factor before rounding)
/// Pareto: N_k = round(N_1 * k^(-1/factor))          (smaller factor = more imbalanced)
/// Rounding is half-up with a floor of one node.
ClassHistogram class_sizes(const ImbalanceSpec& spec);

struct SbmParams {
  std::size_t feature_dim = 32;
  double p_in = 0.05;
  double p_out = 0.005;
  double feature_sep = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stochastic block model with Gaussian node features. Nodes are laid out
/// class by class following `hist`; class k has feature mean feature_sep * e_k
/// (-e_{k-d} once k >= d) and unit spherical noise. Requires K <= 2 d.
Graph generate_sbm_graph(const ClassHistogram& hist, const SbmParams& params);

struct SplitSpec {
  double train_fraction = 1.0;
  std::size_t valid_per_class = 10;
  std::size_t test_per_class = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> valid;
  std::vector<NodeId> test;
  std::uint64_t seed = 0;

  friend bool operator==(const Splits&, const Splits&) = default;
};

/// Balanced valid/test pools drawn uniformly per class; train takes
/// round(train_fraction * N_k) of the remaining nodes of class k (at least 1,
/// at most the remainder), so it keeps the imbalanced class proportions. All
/// id lists are returned sorted.
Splits split_dataset(const Graph& g, const SplitSpec& spec);

std::string splits_to_json(const Splits& s);
Splits splits_from_json(const std::string& text);

}  // namespace imgcl
