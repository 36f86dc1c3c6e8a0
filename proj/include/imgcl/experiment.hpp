#pragma once

#include "imgcl/config.hpp"

namespace imgcl {

struct Dataset {
  Graph graph;
  Splits splits;
  /// Class counts of the training split, indexed by label.
  std::vector<std::size_t> train_counts;
};

/// Generates the synthetic graph and its splits. Each class holds its
/// imbalanced count plus valid_per_class + test_per_class extra nodes, so
/// the training split (train_fraction = 1) follows the imbalance profile
/// exactly while valid/test stay balanced.
Dataset generate_dataset(const ExperimentConfig& cfg);

/// Class sizes of the generated graph (imbalance profile plus the balanced pools).
ClassHistogram graph_class_sizes(const ExperimentConfig& cfg);

std::vector<std::size_t> split_class_counts(const Graph& g, std::span<const NodeId> ids);

/// Fits the linear probe on the training split and scores the test split.
/// Auto sampling is treated as none here; run_experiment resolves it.
MetricsReport probe_and_evaluate(const Matrix& embeddings, const Graph& g, const Splits& splits,
                                 const EvalConfig& cfg, std::uint64_t seed);

struct ExperimentOutcome {
  TrainResult training;
  Matrix embeddings;
  MetricsReport metrics;
};

/// Train -> embed -> probe -> evaluate on an existing dataset.
ExperimentOutcome run_experiment(const Dataset& data, const ExperimentConfig& cfg);

}  // namespace imgcl
