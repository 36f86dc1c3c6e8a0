#pragma once

#include "imgcl/eval.hpp"
#include "imgcl/synth.hpp"
#include "imgcl/training.hpp"

#include <string>

namespace imgcl {

enum class ProbeSampling { Auto, None, Balanced, Progressive };

std::string to_string(ProbeSampling s);
ProbeSampling probe_sampling_from_string(const std::string& name);
/// Resolves Auto against the training mode; other values pass through.
ProbeSampling resolve_sampling(ProbeSampling s, TrainMode mode);

struct EvalConfig {
  double l2_strength = 1e-4;
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  /// Class resampling of the probe's training set: none, uniform over
  /// classes, or progressively balanced (alpha from 1 to 0 over the epochs).
  /// Auto picks balanced for ImGCL and none for Baseline.
  ProbeSampling sampling = ProbeSampling::Auto;
  /// z-score embedding columns with training-set statistics before fitting.
  bool standardize = true;

  void validate() const;
  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

/// One JSON document describing a full experiment. All randomness derives
/// from `seed` through named substreams.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  ImbalanceSpec imbalance;
  SbmParams graph;        // graph.seed is derived from `seed`
  SplitSpec split;        // split.seed is derived from `seed`
  TrainConfig train;      // train.seed is derived from `seed`
  EvalConfig eval;

  void validate() const;
  /// Copies of the component configs with their derived seeds filled in.
  SbmParams graph_params() const;
  SplitSpec split_spec() const;
  TrainConfig train_config() const;
  std::uint64_t probe_seed() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses a config; missing keys take defaults, unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
/// Emits every field, including defaulted ones.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace imgcl
