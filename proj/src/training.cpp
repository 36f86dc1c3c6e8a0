#include "imgcl/training.hpp"

#include "imgcl/clustering.hpp"
#include "imgcl/log.hpp"
#include "imgcl/rng.hpp"

#include <algorithm>
#include <numeric>

namespace imgcl {

std::string to_string(TrainMode mode) { return mode == TrainMode::Baseline ? "baseline" : "imgcl"; }

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "baseline" || name == "Baseline") return TrainMode::Baseline;
  if (name == "imgcl" || name == "ImGCL") return TrainMode::ImGCL;
  throw ValidationError("mode must be 'baseline' or 'imgcl', got '" + name + "'");
}

void TrainConfig::validate() const {
  schedule.validate();
  objective.validate();
  augmentation.validate();
  require(hidden_dim >= 1 && output_dim >= 1, "encoder dims must be >= 1");
  require(num_clusters >= 1, "num_clusters must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(pagerank.damping > 0.0 && pagerank.damping < 1.0, "pagerank damping must be in (0, 1)");
  require(pagerank.tol > 0.0, "pagerank tol must be > 0");
}

StepResult contrastive_loss_and_gradients(const EncoderState& state, const Graph& view1,
                                          const Graph& view2, const ContrastConfig& cfg) {
  const ForwardPass first = forward_pass(state, view1);
  const ForwardPass second = forward_pass(state, view2);
  StepResult out;
  Matrix grad_first, grad_second;
  if (cfg.kind == ObjectiveKind::InfoNCE) {
    const auto n1 = l2_normalize_rows(first.output);
    const auto n2 = l2_normalize_rows(second.output);
    auto loss = infonce_loss(n1.values, n2.values, cfg.temperature);
    out.loss = loss.value;
    grad_first = l2_normalize_rows_backward(n1, loss.grad_first);
    grad_second = l2_normalize_rows_backward(n2, loss.grad_second);
  } else {
    auto loss = decorrelation_loss(first.output, second.output,
                                   cfg.lambda_for(state.output_dim()));
    out.loss = loss.value;
    grad_first = std::move(loss.grad_first);
    grad_second = std::move(loss.grad_second);
  }
  out.gradients = backward(state, first, grad_first);
  const auto other = backward(state, second, grad_second);
  for (std::size_t l = 0; l < 2; ++l) out.gradients[l] += other[l];
  return out;
}

Matrix embed(const EncoderState& state, const Graph& g) { return forward(state, g); }

std::vector<double> class_keep_rates(std::span<const std::size_t> class_counts,
                                     std::span<const double> class_probs, double keep_fraction) {
  require(class_counts.size() == class_probs.size(), "class counts and probabilities differ in size");
  const double n = static_cast<double>(
      std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  std::vector<double> rates(class_counts.size(), 0.0);
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (class_counts[j] > 0) {
      rates[j] = class_probs[j] * n * keep_fraction / static_cast<double>(class_counts[j]);
    }
  }
  return rates;
}

namespace {

double gradient_step(EncoderState& state, const Graph& g, const TrainConfig& cfg,
                     std::size_t epoch) {
  const Graph view1 = augment(g, cfg.augmentation, substream_seed(cfg.seed, "view1", epoch));
  const Graph view2 = augment(g, cfg.augmentation, substream_seed(cfg.seed, "view2", epoch));
  auto step = contrastive_loss_and_gradients(state, view1, view2, cfg.objective);
  for (std::size_t l = 0; l < 2; ++l) state.weights[l] -= cfg.learning_rate * step.gradients[l];
  if (!std::isfinite(step.loss) || !state.weights[0].allFinite() || !state.weights[1].allFinite()) {
    throw NumericalError("training diverged at epoch " + std::to_string(epoch));
  }
  return step.loss;
}

}  // namespace

TrainResult train(const Graph& g, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  result.encoder = init_encoder(g.feature_dim(), cfg.hidden_dim, cfg.output_dim,
                                substream_seed(cfg.seed, "encoder"));
  const std::size_t total = cfg.schedule.total_epochs;

  if (cfg.mode == TrainMode::Baseline) {
    for (std::size_t epoch = 0; epoch < total; ++epoch) {
      result.epoch_losses.push_back(gradient_step(result.encoder, g, cfg, epoch));
    }
    return result;
  }

  const std::size_t n = g.num_nodes();
  const std::size_t k = cfg.num_clusters;
  const std::size_t min_size = cfg.min_cluster_size.value_or(default_min_cluster_size(n, k));
  const CentralityScores centrality = pagerank(g, cfg.pagerank);

  const std::size_t block = cfg.schedule.rebalance_every;
  for (std::size_t stage = 0; stage * block < total; ++stage) {
    StageRecord record;
    record.stage_index = stage;
    record.start_epoch = stage * block;

    const Matrix z = embed(result.encoder, g);
    KMeansOptions km;
    km.min_size = min_size;
    km.seed = substream_seed(cfg.seed, "kmeans", stage);
    km.max_iter = cfg.kmeans_max_iter;
    const ClusterAssignment clusters = constrained_kmeans(z, k, km);
    record.pseudo_label_histogram = clusters.sizes();

    SamplerSchedule now = cfg.schedule;
    now.current_epoch = record.start_epoch;
    record.alpha = alpha_at(now);

    std::vector<std::size_t> positive_counts = record.pseudo_label_histogram;
    for (auto& c : positive_counts) c = std::max<std::size_t>(c, 1);
    const auto mix = pbs_probs(positive_counts, record.alpha);
    const auto rates = class_keep_rates(record.pseudo_label_histogram, mix.probs,
                                        cfg.schedule.keep_fraction);
    const auto probs = centrality_sampling_probs(centrality, rates, clusters.labels,
                                                 cfg.schedule.p_tau, cfg.schedule.keep_fraction,
                                                 cfg.invert_centrality);
    const NodeMask mask = draw_mask(probs, substream_seed(cfg.seed, "mask", stage));
    const Subgraph sub = induced_subgraph(g, mask);
    record.mask_size = mask.count();
    record.subgraph_edges = sub.graph.num_edges();
    if (record.subgraph_edges == 0) {
      spdlog::warn("stage {}: sampled subgraph of {} nodes has no edges", stage, record.mask_size);
    }

    const std::size_t end = std::min(total, record.start_epoch + block);
    double loss_sum = 0.0;
    for (std::size_t epoch = record.start_epoch; epoch < end; ++epoch) {
      const double loss = gradient_step(result.encoder, sub.graph, cfg, epoch);
      result.epoch_losses.push_back(loss);
      loss_sum += loss;
    }
    record.mean_loss = loss_sum / static_cast<double>(end - record.start_epoch);
    spdlog::debug("stage {}: alpha={:.3f} mask={} edges={} loss={:.5f}", stage, record.alpha,
                  record.mask_size, record.subgraph_edges, record.mean_loss);
    result.stages.push_back(std::move(record));
  }
  return result;
}

}  // namespace imgcl
