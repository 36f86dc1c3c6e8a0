// Acceptance suite: criteria 1-10, one PASS/FAIL line each. Exit status is
// nonzero when any criterion fails.

#include "imgcl/centrality.hpp"
#include "imgcl/clustering.hpp"
#include "imgcl/experiment.hpp"
#include "imgcl/log.hpp"
#include "imgcl/rng.hpp"
#include "imgcl/sampling.hpp"
#include "imgcl/theory.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

using namespace imgcl;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void report(int id, const char* name, bool ok, const std::string& detail, double seconds) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, "criterion %2d %-27s %s  %s (%.2f s)", id, name, ok ? "PASS" : "FAIL", detail.c_str(), seconds);
  lines[id] = buf;
  if (!ok) ++failures;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string strf(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- 1
void rate_constant() {
  const auto t0 = Clock::now();
  const double two_over_pi = 2.0 / std::numbers::pi;
  const double c0 = theory::contraction_rate(0.0);
  double best = -1.0;
  int arg = -1;
  for (int i = 0; i <= 500; ++i) {
    const double c = theory::contraction_rate(i * 0.01);
    if (c > best) {
      best = c;
      arg = i;
    }
  }
  const double secs = since(t0);
  const bool ok = std::abs(c0 - two_over_pi) <= 1e-9 && arg == 0 && best <= two_over_pi + 1e-9 && secs < 1.0;
  report(1, "theory rate constant", ok, strf("C(0)=%.12f |C(0)-2/pi|=%.1e argmax x=%.2f", c0, std::abs(c0 - two_over_pi), arg * 0.01),
         secs);
}

// ---- 2
void convergence() {
  const auto t0 = Clock::now();
  theory::GaussianMixSpec s;
  s.mu1 = 0.0;
  s.mu2 = 0.2;
  s.sigma = 1.0;
  s.p_pos = 0.6;
  const auto tr = theory::run_trace(s, s.balanced_boundary() + 0.01, 10);
  double worst = 0.0;
  for (double r : tr.ratios) worst = std::max(worst, r);
  std::vector<double> ys;
  for (double th : tr.thetas) ys.push_back(std::log(std::abs(th - tr.theta_star)));
  const double n = static_cast<double>(ys.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    st += static_cast<double>(t);
    sy += ys[t];
    stt += static_cast<double>(t * t);
    sty += static_cast<double>(t) * ys[t];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icept = (sy - slope * st) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    ss_res += std::pow(ys[t] - icept - slope * static_cast<double>(t), 2);
    ss_tot += std::pow(ys[t] - sy / n, 2);
  }
  const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  const double secs = since(t0);
  const bool ok = tr.ratios.size() == 10 && worst <= 2.0 / std::numbers::pi + 0.05 && r2 >= 0.99 && secs < 1.0;
  report(2, "theory convergence", ok, strf("max ratio %.6f (C(0.1)=%.6f) R^2=%.6f", worst, theory::contraction_rate(0.1), r2),
         secs);
}

// ---- 3
double risk_oracle(const theory::GaussianMixSpec& s, double theta) {
  // +1 is predicted left of theta
  const double left_neg = 0.5 * std::erfc((s.mu2 - theta) / (s.sigma * std::sqrt(2.0)));
  const double right_pos = 0.5 * std::erfc((theta - s.mu1) / (s.sigma * std::sqrt(2.0)));
  return s.p_pos * right_pos + (1.0 - s.p_pos) * left_neg;
}

void bayes() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    theory::GaussianMixSpec s;
    s.mu1 = uniform01(rng) * 4.0 - 2.0;
    s.mu2 = s.mu1 + 0.5 + uniform01(rng) * 3.0;
    s.sigma = 0.3 + uniform01(rng) * 1.5;
    s.p_pos = 0.1 + uniform01(rng) * 0.8;
    const double lo = s.mu1 - 10.0, hi = s.mu2 + 10.0;
    double arg = lo, best = risk_oracle(s, lo);
    const auto steps = static_cast<long>((hi - lo) / 1e-4);
    for (long i = 1; i <= steps; ++i) {
      const double t = lo + static_cast<double>(i) * 1e-4;
      const double r = risk_oracle(s, t);
      if (r < best) {
        best = r;
        arg = t;
      }
    }
    worst = std::max(worst, std::abs(arg - theory::bayes_boundary(s)));
  }
  const double secs = since(t0);
  report(3, "theory bayes optimality", worst <= 2e-4 && secs < 10.0, strf("max |grid - formula| = %.2e over 20 mixtures", worst), secs);
}

// ---- 4
void gradients() {
  const auto t0 = Clock::now();
  Rng rng(4);
  double worst = 0.0, worst_flat = 0.0;
  int flat = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(uniform01(rng) * 6);  // 3..8
    const std::size_t d = 2 + static_cast<std::size_t>(uniform01(rng) * 3);  // 2..4
    std::vector<Edge> e1, e2;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) {
        if (uniform01(rng) < 0.5) e1.emplace_back(u, v);
        if (uniform01(rng) < 0.5) e2.emplace_back(u, v);
      }
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng) * 2.0 - 1.0;
    Graph v1 = build_graph(e1, x), v2 = build_graph(e2, x);
    const std::size_t hidden = 2 + static_cast<std::size_t>(uniform01(rng) * 3);
    EncoderState s = init_encoder(d, hidden, d, 100 + static_cast<std::uint64_t>(trial));
    for (auto kind : {ObjectiveKind::InfoNCE, ObjectiveKind::Decorrelation}) {
      ContrastConfig cfg;
      cfg.kind = kind;
      auto step = contrastive_loss_and_gradients(s, v1, v2, cfg);
      for (std::size_t l = 0; l < 2; ++l) {
        auto f = [&](const Matrix& w) {
          EncoderState t = s;
          t.weights[l] = w;
          return contrastive_loss_and_gradients(t, v1, v2, cfg).loss;
        };
        const Matrix fd = oracle::finite_difference(f, s.weights[l]);
        // A block where the loss is flat (e.g. all rows collapse onto one
        // direction) has a zero gradient; central differences then return
        // pure rounding noise, ~eps*|f|/h, and a ratio of two zeros means nothing.
        if (std::max(step.gradients[l].norm(), fd.norm()) < 1e-6) {
          ++flat;
          worst_flat = std::max(worst_flat, (step.gradients[l] - fd).norm());
        } else {
          worst = std::max(worst, oracle::relative_error(step.gradients[l], fd));
        }
      }
    }
  }
  const double secs = since(t0);
  report(4, "end-to-end gradients", worst <= 1e-4 && worst_flat <= 1e-9 && secs < 30.0,
         strf("max relative error %.2e over 20 instances x 2 objectives x 2 layers; %d flat blocks, max abs diff %.1e",
              worst, flat, worst_flat),
         secs);
}

// ---- 5 (the min_size part also covers every clustering run of criterion 8)
std::size_t min_size_violations = 0;
std::size_t clustering_runs = 0;

void note_histogram(const std::vector<std::size_t>& hist, std::size_t min_size) {
  ++clustering_runs;
  for (auto c : hist)
    if (c < min_size) ++min_size_violations;
}

double clustering_gap = 0.0;
double clustering_secs = 0.0;

void clustering_oracle() {
  const auto t0 = Clock::now();
  Rng rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(uniform01(rng) * 3);  // 1..3
    const auto n = static_cast<std::size_t>(k) + static_cast<std::size_t>(uniform01(rng) * (11 - k));  // k..10
    const auto d = 1 + static_cast<Eigen::Index>(uniform01(rng) * 3);
    Matrix pts(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = normal(rng) + (uniform01(rng) < 0.3 ? 4.0 : 0.0);
    const std::size_t max_min = n / static_cast<std::size_t>(k);
    const std::size_t min_size = std::min<std::size_t>(max_min, static_cast<std::size_t>(uniform01(rng) * (max_min + 1)));
    KMeansOptions opt;
    opt.min_size = min_size;
    opt.seed = static_cast<std::uint64_t>(trial);
    const ClusterAssignment a = constrained_kmeans(pts, static_cast<std::size_t>(k), opt);
    note_histogram(a.sizes(), std::max<std::size_t>(min_size, 1));
    const auto best = oracle::brute_force_kmeans(pts, k, std::max<std::size_t>(min_size, 1));
    const double gap = best.objective > 1e-12 ? a.objective / best.objective - 1.0 : a.objective - best.objective;
    clustering_gap = std::max(clustering_gap, gap);
  }
  clustering_secs = since(t0);
}

// ---- 6
void sampler() {
  const auto t0 = Clock::now();
  bool exact = true;
  auto eq = [&](const std::vector<double>& a, const std::vector<double>& b) { exact = exact && a == b; };
  eq(strategy_probs(std::vector<std::size_t>{50, 20, 5, 1}, 0.0).probs, {0.25, 0.25, 0.25, 0.25});
  eq(strategy_probs(std::vector<std::size_t>{60, 30, 10}, 1.0).probs, {0.6, 0.3, 0.1});
  eq(strategy_probs(std::vector<std::size_t>{9, 4, 1}, 0.5).probs, {3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0});
  std::vector<std::size_t> h{80, 20};
  eq(pbs_probs(h, 1.0).probs, strategy_probs(h, 1.0).probs);
  eq(pbs_probs(h, 0.0).probs, {0.5, 0.5});
  auto half = pbs_probs(h, 0.5).probs;
  exact = exact && std::abs(half[0] - 0.65) <= 1e-15 && std::abs(half[1] - 0.35) <= 1e-15;
  SamplerSchedule s;
  s.total_epochs = 100;
  s.current_epoch = 0;
  exact = exact && alpha_at(s) == 1.0;
  s.current_epoch = 100;
  exact = exact && alpha_at(s) == 0.0;
  s.current_epoch = 25;
  exact = exact && alpha_at(s) == 0.75;
  s.total_epochs = 0;
  s.current_epoch = 0;
  exact = exact && alpha_at(s) == 1.0;

  // per-node frequencies over 10^4 draws
  const std::vector<double> p{0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0, 0.33};
  std::vector<int> hits(p.size(), 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t)
    for (NodeId u : draw_mask(p, static_cast<std::uint64_t>(t)).selected()) ++hits[u];
  double worst_z = 0.0;
  bool freq_ok = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double sd = std::sqrt(trials * p[i] * (1.0 - p[i]));
    const double dev = std::abs(hits[i] - trials * p[i]);
    freq_ok = freq_ok && dev <= 3.0 * sd + 1e-9;
    if (sd > 0) worst_z = std::max(worst_z, dev / sd);
  }
  // one mask over N = 10^4 nodes with mixed probabilities
  std::vector<double> q(10000);
  Rng rng(6);
  double mean = 0.0, var = 0.0;
  for (auto& x : q) {
    x = uniform01(rng);
    mean += x;
    var += x * (1.0 - x);
  }
  const double count = static_cast<double>(draw_mask(q, 17).count());
  freq_ok = freq_ok && std::abs(count - mean) <= 3.0 * std::sqrt(var);
  report(6, "sampler correctness", exact && freq_ok,
         strf("examples %s, worst per-node z=%.2f, N=1e4 mask count %.0f vs %.1f", exact ? "exact" : "MISMATCH", worst_z, count, mean),
         since(t0));
}

// ---- 7
double fixed_point_residual(const Graph& g, const CentralityScores& s) {
  double worst = 0.0;
  std::vector<double> next(g.num_nodes(), 1.0);
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.neighbors(u)) next[v] += s.damping * s.scores[u] / static_cast<double>(g.degree(u));
  for (NodeId u = 0; u < g.num_nodes(); ++u) worst = std::max(worst, std::abs(next[u] - s.scores[u]));
  return worst;
}

void pagerank_checks(const std::vector<Graph>& extra) {
  const auto t0 = Clock::now();
  std::vector<Graph> graphs = extra;
  std::vector<Edge> triangle{{0, 1}, {1, 2}, {0, 2}};
  graphs.push_back(build_graph(triangle, Matrix::Ones(3, 1)));
  std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}}, path{{0, 1}, {1, 2}};
  graphs.push_back(build_graph(star, Matrix::Ones(4, 1)));
  graphs.push_back(build_graph(path, Matrix::Ones(3, 1)));
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    std::vector<Edge> e;
    for (NodeId u = 0; u < 60; ++u)
      for (NodeId v = u + 1; v < 60; ++v)
        if (uniform01(rng) < 0.08) e.emplace_back(u, v);
    graphs.push_back(build_graph(e, Matrix::Ones(60, 1)));
  }
  double worst = 0.0;
  for (const auto& g : graphs) worst = std::max(worst, fixed_point_residual(g, pagerank(g)));

  const auto k3 = pagerank(graphs[extra.size()]).scores;
  const bool sym = std::abs(k3[0] - 20.0 / 3.0) <= 1e-7 && std::abs(k3[1] - k3[0]) <= 1e-9 && std::abs(k3[2] - k3[0]) <= 1e-9;
  const auto st = pagerank(graphs[extra.size() + 1]).scores;
  bool star_ok = true;
  for (std::size_t u = 1; u < st.size(); ++u) star_ok = star_ok && st[0] > st[u] && std::abs(st[u] - st[1]) <= 1e-9;
  const auto pa = pagerank(graphs[extra.size() + 2]).scores;
  const bool path_ok = pa[1] > pa[0] && pa[1] > pa[2] && std::abs(pa[0] - pa[2]) <= 1e-9;
  report(7, "pagerank", worst <= 1e-8 && sym && star_ok && path_ok,
         strf("max residual %.2e on %zu graphs; K3 %.9f, star/path ordering %s", worst, graphs.size(), k3[0],
             star_ok && path_ok ? "ok" : "BROKEN"),
         since(t0));
}

// ---- 10
std::size_t evaluations = 0, identity_failures = 0, bitwise_equal = 0;
double identity_gap = 0.0;

void check_metrics(const MetricsReport& m, bool balanced) {
  ++evaluations;
  std::size_t total = 0, trace = 0;
  bool ok = true;
  for (std::size_t k = 0; k < m.confusion.size(); ++k) {
    const auto row = std::accumulate(m.confusion[k].begin(), m.confusion[k].end(), std::size_t{0});
    ok = ok && row == m.test_counts[k];
    total += row;
    trace += m.confusion[k][k];
  }
  ok = ok && total == m.total && static_cast<double>(trace) / static_cast<double>(total) == m.overall_accuracy;
  if (balanced) {
    const double gap = std::abs(m.overall_accuracy - m.mean_recall());
    identity_gap = std::max(identity_gap, gap);
    bitwise_equal += gap == 0.0;
    ok = ok && gap <= 1e-12;
  }
  if (!ok) ++identity_failures;
}

// ---- 8, 9
ExperimentConfig end_to_end_config(std::uint64_t seed, TrainMode mode) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.imbalance.kind = ImbalanceKind::Exp;
  cfg.imbalance.factor = 100.0;
  cfg.imbalance.num_classes = 10;
  cfg.imbalance.head_size = 600;
  cfg.graph.feature_dim = 32;
  cfg.graph.p_in = 0.05;
  cfg.graph.p_out = 0.005;
  cfg.graph.feature_sep = 1.0;
  cfg.split.valid_per_class = 0;
  cfg.split.test_per_class = 20;
  cfg.train.mode = mode;
  cfg.train.schedule.total_epochs = 100;
  cfg.train.schedule.rebalance_every = 20;
  cfg.train.hidden_dim = 32;
  cfg.train.output_dim = 32;
  cfg.train.learning_rate = 1.0;
  cfg.train.objective.kind = ObjectiveKind::InfoNCE;
  cfg.eval.sampling = ProbeSampling::Auto;
  return cfg;
}

std::vector<Graph> end_to_end() {
  const auto t0 = Clock::now();
  std::vector<double> acc[2], few[2], spread[2], same_probe_acc, same_probe_few;
  std::vector<Graph> graphs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset data = generate_dataset(end_to_end_config(seed, TrainMode::Baseline));
    for (int m = 0; m < 2; ++m) {
      const auto mode = m == 0 ? TrainMode::Baseline : TrainMode::ImGCL;
      const ExperimentConfig cfg = end_to_end_config(seed, mode);
      const auto out = run_experiment(data, cfg);
      const auto& r = out.metrics;
      check_metrics(r, true);
      acc[m].push_back(r.overall_accuracy);
      few[m].push_back(r.group_accuracy[2]);
      spread[m].push_back(r.recall_spread());
      if (mode == TrainMode::ImGCL) {
        const std::size_t min_size = cfg.train.min_cluster_size.value_or(
            default_min_cluster_size(data.graph.num_nodes(), cfg.train.num_clusters));
        for (const auto& st : out.training.stages) note_histogram(st.pseudo_label_histogram, min_size);
      } else {
        // reference: Baseline embeddings under the balanced probe ImGCL uses
        EvalConfig eval = cfg.eval;
        eval.sampling = ProbeSampling::Balanced;
        const auto b = probe_and_evaluate(out.embeddings, data.graph, data.splits, eval, cfg.probe_seed());
        check_metrics(b, true);
        same_probe_acc.push_back(b.overall_accuracy);
        same_probe_few.push_back(b.group_accuracy[2]);
      }
      std::printf("  seed %llu %-8s acc %.3f many %.3f medium %.3f few %.3f spread %.3f\n",
                  static_cast<unsigned long long>(seed), to_string(mode).c_str(), r.overall_accuracy,
                  r.group_accuracy[0], r.group_accuracy[1], r.group_accuracy[2], r.recall_spread());
      std::fflush(stdout);
    }
    if (seed == 1) graphs.push_back(data.graph);
  }
  const double secs = since(t0);
  const double base_acc = median(acc[0]), im_acc = median(acc[1]);
  const double base_few = median(few[0]), im_few = median(few[1]);
  const bool in_band = base_acc >= 0.40 && base_acc <= 0.70;
  report(8, "end-to-end direction",
         in_band && im_acc >= base_acc + 0.05 && im_few >= base_few + 0.10 && secs < 600.0,
         strf("median acc %.3f vs Baseline %.3f (%+.1f pts), few %.3f vs %.3f (%+.1f pts), Baseline in 40-70%%: %s",
             im_acc, base_acc, 100 * (im_acc - base_acc), im_few, base_few, 100 * (im_few - base_few), in_band ? "yes" : "no"),
         secs);
  std::printf("  info: Baseline with the balanced probe: median acc %.3f (%+.1f pts vs ImGCL), few %.3f\n",
              median(same_probe_acc), 100 * (im_acc - median(same_probe_acc)), median(same_probe_few));
  const double base_spread = median(spread[0]), im_spread = median(spread[1]);
  report(9, "per-class bias reduction", im_spread < base_spread,
         strf("median recall spread %.3f vs Baseline %.3f", im_spread, base_spread), 0.0);
  return graphs;
}

// Extra evaluations for criterion 10 on small random balanced test sets.
void metric_identities() {
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(uniform01(rng) * 9);
    const int per = 1 + static_cast<int>(uniform01(rng) * 30);
    std::vector<int> truth, pred;
    for (int c = 0; c < k; ++c)
      for (int i = 0; i < per; ++i) {
        truth.push_back(c);
        pred.push_back(static_cast<int>(uniform01(rng) * k));
      }
    std::vector<std::size_t> counts(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) counts[static_cast<std::size_t>(c)] = static_cast<std::size_t>(3 * (k - c));
    check_metrics(metrics_from_predictions(truth, pred, counts), true);
  }
}

}  // namespace

int main() {
  init_logging();
  spdlog::set_level(spdlog::level::warn);
  rate_constant();
  convergence();
  bayes();
  gradients();
  clustering_oracle();
  sampler();
  auto sbm_graphs = end_to_end();
  pagerank_checks(sbm_graphs);
  report(5, "clustering oracle", clustering_gap <= 0.05 && min_size_violations == 0,
         strf("max gap to exhaustive optimum %.2f%%; min_size violations %zu over %zu runs", 100 * clustering_gap,
             min_size_violations, clustering_runs),
         clustering_secs);
  metric_identities();
  report(10, "metric identities", identity_failures == 0,
         strf("%zu evaluations, max |acc - mean recall| %.1e (%zu bitwise equal), conservation holds", evaluations,
             identity_gap, bitwise_equal),
         0.0);
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
