#include "imgcl/synth.hpp"

#include "imgcl/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace imgcl {

ClassHistogram::ClassHistogram(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
  require(!counts_.empty(), "class histogram needs at least one class");
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    require(counts_[k] >= 1, "class histogram counts must be >= 1");
    require(k == 0 || counts_[k] <= counts_[k - 1],
            "class histogram counts must be non-increasing (class 0 is the head)");
  }
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::vector<double> ClassHistogram::frequencies() const {
  std::vector<double> out(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    out[k] = static_cast<double>(counts_[k]) / static_cast<double>(total_);
  }
  return out;
}

std::vector<std::size_t> count_labels(std::span<const int> labels, int num_classes) {
  std::vector<std::size_t> out(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    require(y >= 0 && y < num_classes, "label out of range");
    ++out[static_cast<std::size_t>(y)];
  }
  return out;
}

std::string to_string(ImbalanceKind kind) { return kind == ImbalanceKind::Exp ? "exp" : "pareto"; }

ImbalanceKind imbalance_kind_from_string(const std::string& name) {
  if (name == "exp" || name == "Exp") return ImbalanceKind::Exp;
  if (name == "pareto" || name == "Pareto") return ImbalanceKind::Pareto;
  throw ValidationError("imbalance kind must be 'exp' or 'pareto', got '" + name + "'");
}

void ImbalanceSpec::validate() const {
  require(std::isfinite(factor) && factor > 0.0, "imbalance factor must satisfy factor > 0");
  require(num_classes >= 1, "num_classes must be >= 1");
  require(head_size >= static_cast<std::size_t>(num_classes),
          "head_size must be >= num_classes");
}

ClassHistogram class_sizes(const ImbalanceSpec& spec) {
  spec.validate();
  const int k_total = spec.num_classes;
  const auto head = static_cast<double>(spec.head_size);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k_total));
  for (int k = 1; k <= k_total; ++k) {
    double raw = head;
    if (spec.kind == ImbalanceKind::Exp) {
      if (k_total > 1) {
        raw = head * std::pow(spec.factor, -static_cast<double>(k - 1) / (k_total - 1));
      }
    } else {
      raw = head * std::pow(static_cast<double>(k), -1.0 / spec.factor);
    }
    const double rounded = std::floor(raw + 0.5);
    counts[static_cast<std::size_t>(k - 1)] =
        std::max<std::size_t>(1, static_cast<std::size_t>(rounded));
  }
  return ClassHistogram(std::move(counts));
}

void SbmParams::validate() const {
  require(feature_dim >= 1, "feature_dim must be >= 1");
  require(0.0 <= p_out && p_out < p_in && p_in <= 1.0, "SBM requires 0 <= p_out < p_in <= 1");
  require(feature_sep > 0.0, "feature_sep must be > 0");
}

Graph generate_sbm_graph(const ClassHistogram& hist, const SbmParams& params) {
  params.validate();
  const std::size_t k_total = hist.num_classes();
  require(k_total >= 1 && hist.total() >= 1, "degenerate class histogram");
  require(k_total <= 2 * params.feature_dim,
          "SBM feature placement needs num_classes <= 2 * feature_dim");

  const std::size_t n = hist.total();
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < k_total; ++k) labels.insert(labels.end(), hist[k], static_cast<int>(k));

  Rng edge_rng = make_rng(params.seed, "sbm.edges");
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? params.p_in : params.p_out;
      if (uniform01(edge_rng) < p) edges.emplace_back(u, v);
    }
  }

  Rng feat_rng = make_rng(params.seed, "sbm.features");
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t d = params.feature_dim;
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = noise(feat_rng);
    const auto k = static_cast<std::size_t>(labels[i]);
    if (k < d) {
      x(i, k) += params.feature_sep;
    } else {
      x(i, k - d) -= params.feature_sep;
    }
  }
  return build_graph(edges, std::move(x), std::move(labels), static_cast<int>(k_total));
}

void SplitSpec::validate() const {
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train_fraction must be in (0, 1]");
}

Splits split_dataset(const Graph& g, const SplitSpec& spec) {
  spec.validate();
  const auto& labels = g.labels();
  const auto k_total = static_cast<std::size_t>(g.num_classes());
  std::vector<std::vector<NodeId>> members(k_total);
  for (NodeId u = 0; u < g.num_nodes(); ++u) members[static_cast<std::size_t>(labels[u])].push_back(u);

  Rng rng = make_rng(spec.seed, "split");
  Splits out;
  out.seed = spec.seed;
  const std::size_t balanced = spec.valid_per_class + spec.test_per_class;
  for (std::size_t k = 0; k < k_total; ++k) {
    auto& ids = members[k];
    if (ids.size() < balanced + 1) {
      throw ValidationError("class " + std::to_string(k) + " has " + std::to_string(ids.size()) +
                            " nodes; balanced valid/test need at least " +
                            std::to_string(balanced + 1));
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    auto it = ids.begin();
    out.valid.insert(out.valid.end(), it, it + static_cast<std::ptrdiff_t>(spec.valid_per_class));
    it += static_cast<std::ptrdiff_t>(spec.valid_per_class);
    out.test.insert(out.test.end(), it, it + static_cast<std::ptrdiff_t>(spec.test_per_class));
    it += static_cast<std::ptrdiff_t>(spec.test_per_class);
    const std::ptrdiff_t remainder = ids.end() - it;
    const double full = static_cast<double>(ids.size());
    auto take = static_cast<std::ptrdiff_t>(std::floor(spec.train_fraction * full + 0.5));
    take = std::clamp<std::ptrdiff_t>(take, 1, remainder);
    out.train.insert(out.train.end(), it, it + take);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::string splits_to_json(const Splits& s) {
  nlohmann::json j = {{"train", s.train}, {"valid", s.valid}, {"test", s.test}, {"seed", s.seed}};
  return j.dump() + "\n";
}

Splits splits_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    Splits s;
    s.train = j.at("train").get<std::vector<NodeId>>();
    s.valid = j.at("valid").get<std::vector<NodeId>>();
    s.test = j.at("test").get<std::vector<NodeId>>();
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid splits.json: " + std::string(e.what()));
  }
}

}  // namespace imgcl
