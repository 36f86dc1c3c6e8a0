#pragma once

#include "imgcl/common.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imgcl {

/// Multinomial logistic regression on frozen embeddings.
struct LinearProbe {
  Matrix weights;  // K x d
  Vector bias;     // K
  double l2_strength = 1e-4;

  std::size_t num_classes() const { return static_cast<std::size_t>(weights.rows()); }
  Matrix logits(const Matrix& embeddings) const;
  std::vector<int> predict(const Matrix& embeddings) const;
};

struct ProbeConfig {
  double l2_strength = 1e-4;
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  /// When set, every epoch trains on a resample of the training ids: a class
  /// is drawn with these probabilities, then a member uniformly.
  std::optional<std::vector<double>> class_probs;
  /// Overrides class_probs: epoch e uses the progressively balanced mixture
  /// with alpha = 1 - e/epochs over the training-class counts.
  bool progressive = false;
};

struct ProbeObjective {
  double value = 0.0;
  Matrix grad_weights;
  Vector grad_bias;
};

/// Mean cross-entropy over `ids` (duplicates count repeatedly) plus
/// (l2/2) * ||W||^2, with its gradient.
ProbeObjective probe_objective(const LinearProbe& probe, const Matrix& embeddings,
                               std::span<const int> labels, std::span<const NodeId> ids);

/// Full-batch gradient descent from zero weights. `objective_trace`, when
/// given, receives the objective on the full training set after each epoch.
LinearProbe fit_probe(const Matrix& embeddings, std::span<const int> labels,
                      std::span<const NodeId> train_ids, int num_classes, const ProbeConfig& cfg,
                      std::vector<double>* objective_trace = nullptr);

/// Column z-scores using the mean and standard deviation over `ids`.
Matrix standardize_features(const Matrix& embeddings, std::span<const NodeId> ids);

enum class Group { Many = 0, Medium = 1, Few = 2 };

struct MetricsReport {
  double overall_accuracy = 0.0;
  /// Accuracy over the test nodes of each group; NaN for an empty group.
  std::array<double, 3> group_accuracy{};
  std::array<std::vector<int>, 3> group_classes;
  std::vector<double> recall;
  std::vector<double> precision;
  std::vector<std::size_t> test_counts;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t total = 0;

  double recall_spread() const;
  double mean_recall() const;
};

/// Splits classes into Many / Medium / Few by descending `class_counts`
/// (ties by class index): floor(K/3) classes at each end, the rest in Medium.
std::array<std::vector<int>, 3> class_groups(std::span<const std::size_t> class_counts);

MetricsReport evaluate(const LinearProbe& probe, const Matrix& embeddings,
                       std::span<const int> labels, std::span<const NodeId> test_ids,
                       std::span<const std::size_t> class_counts);

/// Same metrics from precomputed predictions.
MetricsReport metrics_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                       std::span<const std::size_t> class_counts);

std::string metrics_to_json(const MetricsReport& report);
/// "class,recall,precision,count" rows.
std::string per_class_csv(const MetricsReport& report);
/// Human-readable aligned table.
std::string metrics_table(const MetricsReport& report);

}  // namespace imgcl
