#include "imgcl/eval.hpp"
#include "imgcl/rng.hpp"

#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace imgcl;

namespace {

struct Toy {
  Matrix x;
  std::vector<int> labels;
  std::vector<NodeId> ids;
};

// K Gaussian clusters in d dims, `per_class` points each.
Toy clusters(int k, std::size_t per_class, std::size_t d, double sep, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Toy t;
  t.x.resize(static_cast<Eigen::Index>(k * per_class), static_cast<Eigen::Index>(d));
  for (int c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto row = static_cast<Eigen::Index>(t.labels.size());
      for (Eigen::Index j = 0; j < t.x.cols(); ++j) t.x(row, j) = normal(rng);
      t.x(row, c % static_cast<int>(d)) += sep * (c < static_cast<int>(d) ? 1.0 : -1.0);
      t.ids.push_back(static_cast<NodeId>(row));
      t.labels.push_back(c);
    }
  }
  return t;
}

void check_identities(const MetricsReport& m, std::size_t n_test) {
  std::size_t total = 0, trace = 0;
  for (std::size_t k = 0; k < m.confusion.size(); ++k) {
    const std::size_t row = std::accumulate(m.confusion[k].begin(), m.confusion[k].end(), std::size_t{0});
    CHECK(row == m.test_counts[k]);
    total += row;
    trace += m.confusion[k][k];
  }
  CHECK(total == n_test);
  CHECK(m.total == n_test);
  CHECK(m.overall_accuracy == static_cast<double>(trace) / static_cast<double>(total));
}

}  // namespace

TEST_CASE("probe separates linearly separable classes") {
  Toy t = clusters(2, 30, 2, 10.0, 1);
  ProbeConfig cfg;
  auto probe = fit_probe(t.x, t.labels, t.ids, 2, cfg);
  auto pred = probe.predict(t.x);
  CHECK(pred == t.labels);
}

TEST_CASE("strong regularization shrinks the weights toward uniform predictions") {
  Toy t = clusters(3, 20, 3, 3.0, 2);
  ProbeConfig cfg;
  cfg.l2_strength = 1e4;
  cfg.learning_rate = 1e-5;
  cfg.epochs = 2000;
  auto probe = fit_probe(t.x, t.labels, t.ids, 3, cfg);
  CHECK(probe.weights.cwiseAbs().maxCoeff() < 1e-3);
  Matrix logits = probe.logits(t.x);
  CHECK((logits.rowwise() - logits.row(0)).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("probe objective gradient matches finite differences") {
  Toy t = clusters(2, 4, 3, 1.0, 3);
  Rng rng(4);
  LinearProbe p;
  p.weights = Matrix::Random(2, 3);
  p.bias = Vector::Random(2);
  p.l2_strength = 0.3;
  auto obj = probe_objective(p, t.x, t.labels, t.ids);
  auto fw = [&](const Matrix& w) {
    LinearProbe q = p;
    q.weights = w;
    return probe_objective(q, t.x, t.labels, t.ids).value;
  };
  auto fb = [&](const Matrix& b) {
    LinearProbe q = p;
    q.bias = b.col(0);
    return probe_objective(q, t.x, t.labels, t.ids).value;
  };
  CHECK(oracle::relative_error(obj.grad_weights, oracle::finite_difference(fw, p.weights)) <= 1e-4);
  Matrix b = p.bias;
  Matrix gb = obj.grad_bias;
  CHECK(oracle::relative_error(gb, oracle::finite_difference(fb, b)) <= 1e-4);
}

TEST_CASE("probe objective is monotone at a small learning rate") {
  Toy t = clusters(3, 15, 4, 1.5, 5);
  ProbeConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 300;
  std::vector<double> trace;
  fit_probe(t.x, t.labels, t.ids, 3, cfg, &trace);
  REQUIRE(trace.size() == 300);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("fit_probe rejects a class missing from the training ids") {
  Toy t = clusters(3, 5, 3, 1.0, 6);
  std::vector<NodeId> ids(t.ids.begin(), t.ids.begin() + 10);  // classes 0 and 1 only
  CHECK_THROWS_AS(fit_probe(t.x, t.labels, ids, 3, ProbeConfig{}), ValidationError);
}

TEST_CASE("balanced probe sampling draws classes evenly") {
  // 95 vs 5 examples; with the balanced sampler the minority class is no
  // longer swamped, so its bias ends up closer to the majority's.
  Toy t = clusters(2, 100, 2, 1.0, 7);
  std::vector<NodeId> ids(t.ids.begin(), t.ids.begin() + 95);
  ids.insert(ids.end(), t.ids.begin() + 100, t.ids.begin() + 105);
  ProbeConfig plain, balanced;
  balanced.class_probs = std::vector<double>{0.5, 0.5};
  auto a = fit_probe(t.x, t.labels, ids, 2, plain);
  auto b = fit_probe(t.x, t.labels, ids, 2, balanced);
  CHECK((b.bias(1) - b.bias(0)) > (a.bias(1) - a.bias(0)));
  ProbeConfig progressive;
  progressive.progressive = true;
  CHECK(fit_probe(t.x, t.labels, ids, 2, progressive).weights.allFinite());
  CHECK(fit_probe(t.x, t.labels, ids, 2, balanced).weights == b.weights);
}

TEST_CASE("class groups follow the floor(K/3) rule") {
  std::vector<std::size_t> ten{600, 400, 300, 200, 100, 80, 50, 20, 10, 6};
  auto g = class_groups(ten);
  CHECK(g[0] == std::vector<int>{0, 1, 2});
  CHECK(g[1] == std::vector<int>{3, 4, 5, 6});
  CHECK(g[2] == std::vector<int>{7, 8, 9});
  std::vector<std::size_t> unsorted{5, 50, 20, 10};
  auto h = class_groups(unsorted);
  CHECK(h[0] == std::vector<int>{1});
  CHECK(h[1] == std::vector<int>{2, 3});
  CHECK(h[2] == std::vector<int>{0});
  std::vector<std::size_t> two{5, 3};
  auto small = class_groups(two);
  CHECK(small[0].empty());
  CHECK(small[1] == std::vector<int>{0, 1});
}

TEST_CASE("perfect predictor") {
  std::vector<int> truth{0, 0, 1, 1, 2, 2};
  std::vector<std::size_t> counts{10, 5, 2};
  auto m = metrics_from_predictions(truth, truth, counts);
  CHECK(m.overall_accuracy == 1.0);
  for (double r : m.recall) CHECK(r == 1.0);
  for (double p : m.precision) CHECK(p == 1.0);
  for (double a : m.group_accuracy) CHECK(a == 1.0);
  check_identities(m, 6);
}

TEST_CASE("constant predictor on a balanced test set") {
  const int k = 5;
  std::vector<int> truth, pred;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < 4; ++i) {
      truth.push_back(c);
      pred.push_back(0);
    }
  std::vector<std::size_t> counts{50, 40, 30, 20, 10};
  auto m = metrics_from_predictions(truth, pred, counts);
  CHECK(m.overall_accuracy == doctest::Approx(1.0 / k).epsilon(1e-15));
  CHECK(m.recall == std::vector<double>{1, 0, 0, 0, 0});
  CHECK(m.precision[0] == doctest::Approx(1.0 / k));
  CHECK(m.precision[3] == 0.0);
  CHECK(m.recall_spread() == 1.0);
  check_identities(m, 20);
}

TEST_CASE("balanced test sets: accuracy equals mean recall") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(uniform01(rng) * 10);
    const int per = 1 + static_cast<int>(uniform01(rng) * 25);
    std::vector<int> truth, pred;
    for (int c = 0; c < k; ++c)
      for (int i = 0; i < per; ++i) {
        truth.push_back(c);
        pred.push_back(uniform01(rng) < 0.5 ? c : static_cast<int>(uniform01(rng) * k));
      }
    std::vector<std::size_t> counts(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) counts[static_cast<std::size_t>(c)] = static_cast<std::size_t>(100 - c);
    auto m = metrics_from_predictions(truth, pred, counts);
    CHECK(std::abs(m.overall_accuracy - m.mean_recall()) <= 1e-12);
    check_identities(m, truth.size());
  }
}

TEST_CASE("empty groups report NaN and absent predictions give zero precision") {
  std::vector<int> truth{0, 1}, pred{0, 0};
  std::vector<std::size_t> counts{3, 1};
  auto m = metrics_from_predictions(truth, pred, counts);
  CHECK(std::isnan(m.group_accuracy[0]));
  CHECK(std::isnan(m.group_accuracy[2]));
  CHECK(m.group_accuracy[1] == 0.5);
  CHECK(m.precision[1] == 0.0);
}

TEST_CASE("evaluate matches predictions and serializes") {
  Toy t = clusters(3, 10, 3, 4.0, 10);
  auto probe = fit_probe(t.x, t.labels, t.ids, 3, ProbeConfig{});
  std::vector<std::size_t> counts{30, 20, 10};
  auto m = evaluate(probe, t.x, t.labels, t.ids, counts);
  std::vector<int> truth = t.labels;
  auto pred = probe.predict(t.x);
  auto ref = metrics_from_predictions(truth, pred, counts);
  CHECK(m.confusion == ref.confusion);
  auto j = nlohmann::json::parse(metrics_to_json(m));
  CHECK(j.at("overall_accuracy").get<double>() == m.overall_accuracy);
  CHECK(j.at("confusion").size() == 3);
  const std::string csv = per_class_csv(m);
  CHECK(csv.rfind("class,recall,precision,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(metrics_table(m).find("few") != std::string::npos);
}

TEST_CASE("standardize_features uses the statistics of the given ids") {
  Matrix x(4, 2);
  x << 1, 10, 3, 10, 100, -5, 7, 0;
  std::vector<NodeId> ids{0, 1};
  Matrix s = standardize_features(x, ids);
  CHECK(s(0, 0) == doctest::Approx(-1.0));
  CHECK(s(1, 0) == doctest::Approx(1.0));
  CHECK(s(2, 0) == doctest::Approx(98.0));
  CHECK(std::isfinite(s(0, 1)));
}
