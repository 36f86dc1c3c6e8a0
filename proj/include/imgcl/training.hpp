#pragma once

#include "imgcl/centrality.hpp"
#include "imgcl/encoder.hpp"
#include "imgcl/objectives.hpp"
#include "imgcl/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace imgcl {

enum class TrainMode { Baseline, ImGCL };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainConfig {
  SamplerSchedule schedule;
  std::size_t hidden_dim = 16;
  std::size_t output_dim = 16;
  ContrastConfig objective;
  AugmentationConfig augmentation;
  std::size_t num_clusters = 10;
  /// Unset means floor(N / (4K)).
  std::optional<std::size_t> min_cluster_size;
  std::size_t kmeans_max_iter = 50;
  double learning_rate = 0.01;
  PageRankParams pagerank;
  bool invert_centrality = false;
  TrainMode mode = TrainMode::ImGCL;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StageRecord {
  std::size_t stage_index = 0;
  std::size_t start_epoch = 0;
  double alpha = 1.0;
  std::vector<std::size_t> pseudo_label_histogram;
  std::size_t mask_size = 0;
  std::size_t subgraph_edges = 0;
  double mean_loss = 0.0;
};

struct TrainResult {
  EncoderState encoder;
  std::vector<StageRecord> stages;
  std::vector<double> epoch_losses;
};

struct StepResult {
  double loss = 0.0;
  EncoderGradients gradients;
};

/// Loss of the configured objective between the encodings of two views and
/// its exact gradient with respect to the encoder weights. InfoNCE rows are
/// L2-normalized first; the decorrelation loss standardizes internally.
StepResult contrastive_loss_and_gradients(const EncoderState& state, const Graph& view1,
                                          const Graph& view2, const ContrastConfig& cfg);

/// Deterministic forward pass on the un-augmented graph.
Matrix embed(const EncoderState& state, const Graph& g);

/// Baseline: T epochs of full-graph contrastive training, one gradient step
/// per epoch on two fresh augmented views.
///
/// ImGCL: PageRank is computed once up front; then for each stage of B epochs
/// the full graph is embedded and clustered into pseudo-classes, the class
/// mixture for alpha = 1 - t/T is turned into per-node keep probabilities
/// through the centrality weighting (rescaled to an expected N * l nodes), a
/// mask is drawn, and the encoder trains on the induced subgraph.
TrainResult train(const Graph& g, const TrainConfig& cfg);

/// Per-node keep rate of pseudo-class j before the centrality factor:
/// p_j * N * l / N_j, i.e. the class mixture p spread over the class members
/// so that the expected mask size is N * l.
std::vector<double> class_keep_rates(std::span<const std::size_t> class_counts,
                                     std::span<const double> class_probs, double keep_fraction);

}  // namespace imgcl
