#include "imgcl/eval.hpp"

#include "imgcl/rng.hpp"
#include "imgcl/sampling.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <spdlog/fmt/fmt.h>

namespace imgcl {

Matrix LinearProbe::logits(const Matrix& embeddings) const {
  return (embeddings * weights.transpose()).rowwise() + bias.transpose();
}

std::vector<int> LinearProbe::predict(const Matrix& embeddings) const {
  const Matrix s = logits(embeddings);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    s.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

ProbeObjective probe_objective(const LinearProbe& probe, const Matrix& embeddings,
                               std::span<const int> labels, std::span<const NodeId> ids) {
  require(!ids.empty(), "probe objective needs at least one example");
  const auto k = static_cast<Eigen::Index>(probe.num_classes());
  ProbeObjective out;
  out.grad_weights = Matrix::Zero(k, probe.weights.cols());
  out.grad_bias = Vector::Zero(k);
  Eigen::RowVectorXd scores(k);
  for (NodeId id : ids) {
    const auto x = embeddings.row(id);
    scores = x * probe.weights.transpose() + probe.bias.transpose();
    const double m = scores.maxCoeff();
    Eigen::RowVectorXd p = (scores.array() - m).exp();
    const double s = p.sum();
    p /= s;
    const int y = labels[id];
    out.value += m + std::log(s) - scores(y);
    p(y) -= 1.0;
    out.grad_weights.noalias() += p.transpose() * x;
    out.grad_bias += p.transpose();
  }
  const auto n = static_cast<double>(ids.size());
  out.value /= n;
  out.grad_weights /= n;
  out.grad_bias /= n;
  out.value += 0.5 * probe.l2_strength * probe.weights.squaredNorm();
  out.grad_weights += probe.l2_strength * probe.weights;
  return out;
}

LinearProbe fit_probe(const Matrix& embeddings, std::span<const int> labels,
                      std::span<const NodeId> train_ids, int num_classes, const ProbeConfig& cfg,
                      std::vector<double>* objective_trace) {
  require(!train_ids.empty(), "probe needs labeled training ids");
  require(cfg.learning_rate > 0.0 && cfg.l2_strength >= 0.0, "invalid probe configuration");
  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<NodeId>> by_class(k);
  for (NodeId id : train_ids) {
    const int y = labels[id];
    require(y >= 0 && static_cast<std::size_t>(y) < k, "training label out of range");
    by_class[static_cast<std::size_t>(y)].push_back(id);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (by_class[c].empty()) {
      throw ValidationError("class " + std::to_string(c) + " is absent from the training ids");
    }
  }

  LinearProbe probe;
  probe.l2_strength = cfg.l2_strength;
  probe.weights = Matrix::Zero(num_classes, embeddings.cols());
  probe.bias = Vector::Zero(num_classes);

  std::discrete_distribution<std::size_t> pick_class;
  if (cfg.class_probs && !cfg.progressive) {
    require(cfg.class_probs->size() == k, "probe sampler needs one probability per class");
    pick_class = std::discrete_distribution<std::size_t>(cfg.class_probs->begin(),
                                                         cfg.class_probs->end());
  }
  std::vector<std::size_t> class_counts(k);
  for (std::size_t c = 0; c < k; ++c) class_counts[c] = by_class[c].size();
  const bool resample = cfg.class_probs.has_value() || cfg.progressive;

  Rng rng = make_rng(cfg.seed, "probe.sampler");
  std::vector<NodeId> batch(train_ids.begin(), train_ids.end());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.progressive) {
      const double alpha = 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
      const auto mix = pbs_probs(class_counts, alpha);
      pick_class = std::discrete_distribution<std::size_t>(mix.probs.begin(), mix.probs.end());
    }
    if (resample) {
      for (auto& id : batch) {
        const auto& members = by_class[pick_class(rng)];
        id = members[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(members.size()))];
      }
    }
    const auto obj = probe_objective(probe, embeddings, labels, batch);
    probe.weights -= cfg.learning_rate * obj.grad_weights;
    probe.bias -= cfg.learning_rate * obj.grad_bias;
    if (objective_trace) {
      objective_trace->push_back(probe_objective(probe, embeddings, labels, train_ids).value);
    }
  }
  return probe;
}

Matrix standardize_features(const Matrix& embeddings, std::span<const NodeId> ids) {
  require(!ids.empty(), "standardization needs at least one id");
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(embeddings.cols());
  for (NodeId id : ids) mean += embeddings.row(id);
  mean /= static_cast<double>(ids.size());
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(embeddings.cols());
  for (NodeId id : ids) var += (embeddings.row(id) - mean).array().square().matrix();
  var /= static_cast<double>(ids.size());
  const Eigen::RowVectorXd scale = var.array().sqrt().max(1e-12).inverse();
  return ((embeddings.rowwise() - mean).array().rowwise() * scale.array()).matrix();
}

std::array<std::vector<int>, 3> class_groups(std::span<const std::size_t> class_counts) {
  const std::size_t k = class_counts.size();
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return class_counts[static_cast<std::size_t>(a)] > class_counts[static_cast<std::size_t>(b)];
  });
  const std::size_t edge = k / 3;
  std::array<std::vector<int>, 3> groups;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t g = r < edge ? 0 : (r >= k - edge ? 2 : 1);
    groups[g].push_back(order[r]);
  }
  return groups;
}

MetricsReport metrics_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                       std::span<const std::size_t> class_counts) {
  require(truth.size() == predicted.size(), "truth and predictions differ in length");
  const std::size_t k = class_counts.size();
  MetricsReport r;
  r.total = truth.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && static_cast<std::size_t>(truth[i]) < k, "test label out of range");
    require(predicted[i] >= 0 && static_cast<std::size_t>(predicted[i]) < k,
            "prediction out of range");
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  r.recall.assign(k, 0.0);
  r.precision.assign(k, 0.0);
  r.test_counts.assign(k, 0);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t col = 0;
    for (std::size_t t = 0; t < k; ++t) {
      r.test_counts[c] += r.confusion[c][t];
      col += r.confusion[t][c];
    }
    correct += r.confusion[c][c];
    const auto hit = static_cast<double>(r.confusion[c][c]);
    if (r.test_counts[c] > 0) r.recall[c] = hit / static_cast<double>(r.test_counts[c]);
    if (col > 0) r.precision[c] = hit / static_cast<double>(col);
  }
  r.overall_accuracy =
      r.total > 0 ? static_cast<double>(correct) / static_cast<double>(r.total) : 0.0;

  r.group_classes = class_groups(class_counts);
  for (std::size_t g = 0; g < 3; ++g) {
    std::size_t hits = 0, count = 0;
    for (int c : r.group_classes[g]) {
      hits += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
      count += r.test_counts[static_cast<std::size_t>(c)];
    }
    r.group_accuracy[g] = count > 0 ? static_cast<double>(hits) / static_cast<double>(count)
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

MetricsReport evaluate(const LinearProbe& probe, const Matrix& embeddings,
                       std::span<const int> labels, std::span<const NodeId> test_ids,
                       std::span<const std::size_t> class_counts) {
  require(class_counts.size() == probe.num_classes(), "class counts must cover every class");
  const auto all = probe.predict(embeddings);
  std::vector<int> truth, predicted;
  truth.reserve(test_ids.size());
  predicted.reserve(test_ids.size());
  for (NodeId id : test_ids) {
    truth.push_back(labels[id]);
    predicted.push_back(all[id]);
  }
  return metrics_from_predictions(truth, predicted, class_counts);
}

double MetricsReport::recall_spread() const {
  if (recall.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(recall.begin(), recall.end());
  return *hi - *lo;
}

double MetricsReport::mean_recall() const {
  if (recall.empty()) return 0.0;
  return std::accumulate(recall.begin(), recall.end(), 0.0) / static_cast<double>(recall.size());
}

namespace {
const char* kGroupNames[3] = {"many", "medium", "few"};
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::json groups;
  for (std::size_t g = 0; g < 3; ++g) {
    groups[kGroupNames[g]] = {{"accuracy", std::isnan(r.group_accuracy[g])
                                               ? nlohmann::json(nullptr)
                                               : nlohmann::json(r.group_accuracy[g])},
                              {"classes", r.group_classes[g]}};
  }
  nlohmann::json j = {
      {"overall_accuracy", r.overall_accuracy},
      {"groups", groups},
      {"recall", r.recall},
      {"precision", r.precision},
      {"test_counts", r.test_counts},
      {"confusion", r.confusion},
      {"total", r.total},
  };
  return j.dump(2) + "\n";
}

std::string per_class_csv(const MetricsReport& r) {
  std::string out = "class,recall,precision,count\n";
  for (std::size_t c = 0; c < r.recall.size(); ++c) {
    out += fmt::format("{},{},{},{}\n", c, r.recall[c], r.precision[c], r.test_counts[c]);
  }
  return out;
}

std::string metrics_table(const MetricsReport& r) {
  std::string out;
  out += fmt::format("{:<10}{:>10}\n", "overall", fmt::format("{:.4f}", r.overall_accuracy));
  for (std::size_t g = 0; g < 3; ++g) {
    out += fmt::format("{:<10}{:>10}\n", kGroupNames[g],
                       std::isnan(r.group_accuracy[g]) ? std::string("-")
                                                       : fmt::format("{:.4f}", r.group_accuracy[g]));
  }
  out += fmt::format("\n{:>6}{:>10}{:>11}{:>7}\n", "class", "recall", "precision", "count");
  for (std::size_t c = 0; c < r.recall.size(); ++c) {
    out += fmt::format("{:>6}{:>10.4f}{:>11.4f}{:>7}\n", c, r.recall[c], r.precision[c],
                       r.test_counts[c]);
  }
  return out;
}

}  // namespace imgcl
