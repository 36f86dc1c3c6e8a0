#include "imgcl/experiment.hpp"

namespace imgcl {

ClassHistogram graph_class_sizes(const ExperimentConfig& cfg) {
  auto counts = class_sizes(cfg.imbalance).counts();
  for (auto& c : counts) c += cfg.split.valid_per_class + cfg.split.test_per_class;
  return ClassHistogram(std::move(counts));
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset data;
  data.graph = generate_sbm_graph(graph_class_sizes(cfg), cfg.graph_params());
  data.splits = split_dataset(data.graph, cfg.split_spec());
  data.train_counts = split_class_counts(data.graph, data.splits.train);
  return data;
}

std::vector<std::size_t> split_class_counts(const Graph& g, std::span<const NodeId> ids) {
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (NodeId id : ids) labels.push_back(g.labels()[id]);
  return count_labels(labels, g.num_classes());
}

MetricsReport probe_and_evaluate(const Matrix& embeddings, const Graph& g, const Splits& splits,
                                 const EvalConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Matrix features =
      cfg.standardize ? standardize_features(embeddings, splits.train) : embeddings;
  const auto train_counts = split_class_counts(g, splits.train);
  ProbeConfig probe_cfg;
  probe_cfg.l2_strength = cfg.l2_strength;
  probe_cfg.epochs = cfg.epochs;
  probe_cfg.learning_rate = cfg.learning_rate;
  probe_cfg.seed = seed;
  if (cfg.sampling == ProbeSampling::Balanced) {
    probe_cfg.class_probs = std::vector<double>(train_counts.size(),
                                                1.0 / static_cast<double>(train_counts.size()));
  } else if (cfg.sampling == ProbeSampling::Progressive) {
    probe_cfg.progressive = true;
  }
  const LinearProbe probe =
      fit_probe(features, g.labels(), splits.train, g.num_classes(), probe_cfg);
  return evaluate(probe, features, g.labels(), splits.test, train_counts);
}

ExperimentOutcome run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  out.training = train(data.graph, cfg.train_config());
  out.embeddings = embed(out.training.encoder, data.graph);
  EvalConfig eval = cfg.eval;
  eval.sampling = resolve_sampling(eval.sampling, cfg.train.mode);
  out.metrics = probe_and_evaluate(out.embeddings, data.graph, data.splits, eval, cfg.probe_seed());
  return out;
}

}  // namespace imgcl
