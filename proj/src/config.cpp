#include "imgcl/config.hpp"

#include "imgcl/rng.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace imgcl {

using nlohmann::json;

std::string to_string(ProbeSampling s) {
  switch (s) {
    case ProbeSampling::Auto: return "auto";
    case ProbeSampling::None: return "none";
    case ProbeSampling::Balanced: return "balanced";
    case ProbeSampling::Progressive: return "progressive";
  }
  return "none";
}

ProbeSampling probe_sampling_from_string(const std::string& name) {
  if (name == "auto") return ProbeSampling::Auto;
  if (name == "none") return ProbeSampling::None;
  if (name == "balanced") return ProbeSampling::Balanced;
  if (name == "progressive") return ProbeSampling::Progressive;
  throw ValidationError("probe sampling must be auto, none, balanced or progressive; got '" + name + "'");
}

ProbeSampling resolve_sampling(ProbeSampling s, TrainMode mode) {
  if (s != ProbeSampling::Auto) return s;
  return mode == TrainMode::ImGCL ? ProbeSampling::Balanced : ProbeSampling::None;
}

void EvalConfig::validate() const {
  require(l2_strength >= 0.0, "eval.l2_strength must be >= 0");
  require(learning_rate > 0.0, "eval.learning_rate must be > 0");
}

void ExperimentConfig::validate() const {
  imbalance.validate();
  graph.validate();
  split.validate();
  train.validate();
  eval.validate();
}

SbmParams ExperimentConfig::graph_params() const {
  SbmParams p = graph;
  p.seed = substream_seed(seed, "graph");
  return p;
}

SplitSpec ExperimentConfig::split_spec() const {
  SplitSpec s = split;
  s.seed = substream_seed(seed, "split");
  return s;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t = train;
  t.seed = substream_seed(seed, "train");
  return t;
}

std::uint64_t ExperimentConfig::probe_seed() const { return substream_seed(seed, "probe"); }

namespace {

// Reads keys from one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ValidationError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError("config key " + name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError("unknown config key: " + name_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  Section top(root, "config");
  top.get("seed", cfg.seed);

  if (const json* j = top.child("imbalance")) {
    Section s(*j, "imbalance");
    std::string kind = to_string(cfg.imbalance.kind);
    s.get("kind", kind);
    cfg.imbalance.kind = imbalance_kind_from_string(kind);
    s.get("factor", cfg.imbalance.factor);
    s.get("num_classes", cfg.imbalance.num_classes);
    s.get("head_size", cfg.imbalance.head_size);
    s.finish();
  }
  if (const json* j = top.child("graph")) {
    Section s(*j, "graph");
    s.get("feature_dim", cfg.graph.feature_dim);
    s.get("p_in", cfg.graph.p_in);
    s.get("p_out", cfg.graph.p_out);
    s.get("feature_sep", cfg.graph.feature_sep);
    s.finish();
  }
  if (const json* j = top.child("split")) {
    Section s(*j, "split");
    s.get("train_fraction", cfg.split.train_fraction);
    s.get("valid_per_class", cfg.split.valid_per_class);
    s.get("test_per_class", cfg.split.test_per_class);
    s.finish();
  }
  if (const json* j = top.child("train")) {
    Section s(*j, "train");
    TrainConfig& t = cfg.train;
    std::string mode = to_string(t.mode);
    s.get("mode", mode);
    t.mode = train_mode_from_string(mode);
    s.get("total_epochs", t.schedule.total_epochs);
    s.get("rebalance_every", t.schedule.rebalance_every);
    s.get("keep_fraction", t.schedule.keep_fraction);
    s.get("p_tau", t.schedule.p_tau);
    s.get("hidden_dim", t.hidden_dim);
    s.get("output_dim", t.output_dim);
    std::string objective = to_string(t.objective.kind);
    s.get("objective", objective);
    t.objective.kind = objective_kind_from_string(objective);
    s.get("temperature", t.objective.temperature);
    s.get("lambda_offdiag", t.objective.lambda_offdiag);
    s.get("edge_drop_prob", t.augmentation.edge_drop_prob);
    s.get("feature_mask_prob", t.augmentation.feature_mask_prob);
    s.get("num_clusters", t.num_clusters);
    if (const json* m = s.child("min_cluster_size"); m && !m->is_null()) {
      t.min_cluster_size = m->get<std::size_t>();
    }
    s.get("kmeans_max_iter", t.kmeans_max_iter);
    s.get("learning_rate", t.learning_rate);
    s.get("pagerank_damping", t.pagerank.damping);
    s.get("pagerank_tol", t.pagerank.tol);
    s.get("pagerank_max_iter", t.pagerank.max_iter);
    s.get("invert_centrality", t.invert_centrality);
    s.finish();
  }
  if (const json* j = top.child("eval")) {
    Section s(*j, "eval");
    s.get("l2_strength", cfg.eval.l2_strength);
    s.get("epochs", cfg.eval.epochs);
    s.get("learning_rate", cfg.eval.learning_rate);
    std::string sampling = to_string(cfg.eval.sampling);
    s.get("sampling", sampling);
    cfg.eval.sampling = probe_sampling_from_string(sampling);
    s.get("standardize", cfg.eval.standardize);
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json j = {
      {"seed", cfg.seed},
      {"imbalance",
       {{"kind", to_string(cfg.imbalance.kind)},
        {"factor", cfg.imbalance.factor},
        {"num_classes", cfg.imbalance.num_classes},
        {"head_size", cfg.imbalance.head_size}}},
      {"graph",
       {{"feature_dim", cfg.graph.feature_dim},
        {"p_in", cfg.graph.p_in},
        {"p_out", cfg.graph.p_out},
        {"feature_sep", cfg.graph.feature_sep}}},
      {"split",
       {{"train_fraction", cfg.split.train_fraction},
        {"valid_per_class", cfg.split.valid_per_class},
        {"test_per_class", cfg.split.test_per_class}}},
      {"train",
       {{"mode", to_string(t.mode)},
        {"total_epochs", t.schedule.total_epochs},
        {"rebalance_every", t.schedule.rebalance_every},
        {"keep_fraction", t.schedule.keep_fraction},
        {"p_tau", t.schedule.p_tau},
        {"hidden_dim", t.hidden_dim},
        {"output_dim", t.output_dim},
        {"objective", to_string(t.objective.kind)},
        {"temperature", t.objective.temperature},
        {"lambda_offdiag", t.objective.lambda_offdiag},
        {"edge_drop_prob", t.augmentation.edge_drop_prob},
        {"feature_mask_prob", t.augmentation.feature_mask_prob},
        {"num_clusters", t.num_clusters},
        {"min_cluster_size",
         t.min_cluster_size ? json(*t.min_cluster_size) : json(nullptr)},
        {"kmeans_max_iter", t.kmeans_max_iter},
        {"learning_rate", t.learning_rate},
        {"pagerank_damping", t.pagerank.damping},
        {"pagerank_tol", t.pagerank.tol},
        {"pagerank_max_iter", t.pagerank.max_iter},
        {"invert_centrality", t.invert_centrality}}},
      {"eval",
       {{"l2_strength", cfg.eval.l2_strength},
        {"epochs", cfg.eval.epochs},
        {"learning_rate", cfg.eval.learning_rate},
        {"sampling", to_string(cfg.eval.sampling)},
        {"standardize", cfg.eval.standardize}}},
  };
  return j.dump(2) + "\n";
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

}  // namespace imgcl
