// imgcl: command-line front end. Subcommands: gen, train, eval, theory,
// pagerank, cluster. Exit codes: 0 ok, 2 usage/validation, 3 numerical.

#include "imgcl/centrality.hpp"
#include "imgcl/clustering.hpp"
#include "imgcl/config.hpp"
#include "imgcl/experiment.hpp"
#include "imgcl/graph_io.hpp"
#include "imgcl/log.hpp"
#include "imgcl/theory.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace imgcl;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Options shared by gen and train; only the ones actually given override the config.
struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> kind;
  std::optional<double> factor;
  std::optional<int> classes;
  std::optional<std::size_t> head;
  std::optional<std::size_t> feature_dim;
  std::optional<double> p_in, p_out, feature_sep;
  std::optional<double> train_fraction;
  std::optional<std::size_t> valid_per_class, test_per_class;
  std::optional<std::string> mode, objective, sampling;
  std::optional<std::size_t> epochs, rebalance_every, hidden_dim, output_dim, clusters;
  std::optional<double> keep_fraction, learning_rate, temperature;
};

void add_config_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "JSON config; flags override its fields")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Root seed");
}

void add_data_options(CLI::App* app, Overrides& o) {
  app->add_option("--kind", o.kind, "Imbalance type: exp or pareto");
  app->add_option("--factor", o.factor, "Imbalance factor");
  app->add_option("--classes", o.classes, "Number of classes");
  app->add_option("--head", o.head, "Size of the largest class");
  app->add_option("--feature-dim", o.feature_dim);
  app->add_option("--p-in", o.p_in);
  app->add_option("--p-out", o.p_out);
  app->add_option("--feature-sep", o.feature_sep);
  app->add_option("--train-fraction", o.train_fraction);
  app->add_option("--valid-per-class", o.valid_per_class);
  app->add_option("--test-per-class", o.test_per_class);
}

void add_train_options(CLI::App* app, Overrides& o) {
  app->add_option("--mode", o.mode, "ImGCL or Baseline");
  app->add_option("--objective", o.objective, "infonce or decorrelation");
  app->add_option("--epochs", o.epochs, "Total epochs T");
  app->add_option("--rebalance-every", o.rebalance_every, "Epochs per stage B");
  app->add_option("--keep-fraction", o.keep_fraction, "Expected sampled fraction l");
  app->add_option("--hidden-dim", o.hidden_dim);
  app->add_option("--output-dim", o.output_dim);
  app->add_option("--clusters", o.clusters, "Number of pseudo-label clusters");
  app->add_option("--lr", o.learning_rate, "Encoder learning rate");
  app->add_option("--temperature", o.temperature);
}

template <class T, class U>
void put(const std::optional<T>& v, U& field) {
  if (v) field = static_cast<U>(*v);
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig cfg = o.config_file.empty() ? ExperimentConfig{} : config_from_json(io::read_text(o.config_file));
  put(o.seed, cfg.seed);
  if (o.kind) cfg.imbalance.kind = imbalance_kind_from_string(*o.kind);
  put(o.factor, cfg.imbalance.factor);
  put(o.classes, cfg.imbalance.num_classes);
  put(o.head, cfg.imbalance.head_size);
  put(o.feature_dim, cfg.graph.feature_dim);
  put(o.p_in, cfg.graph.p_in);
  put(o.p_out, cfg.graph.p_out);
  put(o.feature_sep, cfg.graph.feature_sep);
  put(o.train_fraction, cfg.split.train_fraction);
  put(o.valid_per_class, cfg.split.valid_per_class);
  put(o.test_per_class, cfg.split.test_per_class);
  if (o.mode) cfg.train.mode = train_mode_from_string(*o.mode);
  if (o.objective) cfg.train.objective.kind = objective_kind_from_string(*o.objective);
  if (o.sampling) cfg.eval.sampling = probe_sampling_from_string(*o.sampling);
  put(o.epochs, cfg.train.schedule.total_epochs);
  put(o.rebalance_every, cfg.train.schedule.rebalance_every);
  put(o.keep_fraction, cfg.train.schedule.keep_fraction);
  put(o.hidden_dim, cfg.train.hidden_dim);
  put(o.output_dim, cfg.train.output_dim);
  put(o.clusters, cfg.train.num_clusters);
  put(o.learning_rate, cfg.train.learning_rate);
  put(o.temperature, cfg.train.objective.temperature);
  cfg.validate();
  return cfg;
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
}

std::string stages_json(const TrainResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage_index},
                      {"start_epoch", s.start_epoch},
                      {"alpha", s.alpha},
                      {"pseudo_label_histogram", s.pseudo_label_histogram},
                      {"mask_size", s.mask_size},
                      {"subgraph_edges", s.subgraph_edges},
                      {"mean_loss", s.mean_loss}});
  }
  return json{{"stages", stages}, {"epoch_losses", r.epoch_losses}}.dump(2) + "\n";
}

int cmd_gen(const Overrides& o, const fs::path& out) {
  ExperimentConfig cfg = build_config(o);
  Dataset data = generate_dataset(cfg);
  io::save_graph_dir(data.graph, out);
  io::write_text(out / "splits.json", splits_to_json(data.splits));
  io::write_text(out / "config.json", config_to_json(cfg));
  spdlog::info("gen: {} nodes, {} edges, {} classes -> {}", data.graph.num_nodes(), data.graph.num_edges(),
               data.graph.num_classes(), out.string());
  return 0;
}

void train_one(const Graph& g, const ExperimentConfig& cfg, const fs::path& out) {
  TrainResult r = train(g, cfg.train_config());
  fs::create_directories(out);
  save_weights(r.encoder, out / "weights.bin");
  io::save_matrix_tsv(embed(r.encoder, g), out / "embeddings.tsv");
  io::write_text(out / "stages.json", stages_json(r));
  io::write_text(out / "config.json", config_to_json(cfg));
}

int cmd_train(const Overrides& o, const fs::path& data_dir, const fs::path& out,
              const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  require_dir(data_dir);
  Graph g = io::load_graph_dir(data_dir);
  ExperimentConfig cfg = build_config(o);
  if (seeds.empty()) {
    train_one(g, cfg, out);
    spdlog::info("train: wrote {}", out.string());
    return 0;
  }
  // One worker per seed, each with its own config copy and output directory.
  std::size_t next = 0;
  std::mutex m;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (next >= seeds.size() || failure) return;
        i = next++;
      }
      try {
        ExperimentConfig c = cfg;
        c.seed = seeds[i];
        train_one(g, c, out / ("seed_" + std::to_string(seeds[i])));
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(jobs, seeds.size())); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  spdlog::info("train: wrote {} runs under {}", seeds.size(), out.string());
  return 0;
}

int cmd_eval(const fs::path& data_dir, const fs::path& run_dir, const fs::path& out,
             const std::optional<std::string>& sampling) {
  require_dir(data_dir);
  require_dir(run_dir);
  Graph g = io::load_graph_dir(data_dir);
  Splits splits = splits_from_json(io::read_text(data_dir / "splits.json"));
  ExperimentConfig cfg = config_from_json(io::read_text(run_dir / "config.json"));
  Matrix emb = io::load_matrix_tsv(run_dir / "embeddings.tsv");
  require(static_cast<std::size_t>(emb.rows()) == g.num_nodes(), "embeddings and graph disagree on the node count");
  EvalConfig eval = cfg.eval;
  if (sampling) eval.sampling = probe_sampling_from_string(*sampling);
  eval.sampling = resolve_sampling(eval.sampling, cfg.train.mode);
  MetricsReport m = probe_and_evaluate(emb, g, splits, eval, cfg.probe_seed());
  fs::create_directories(out);
  io::write_text(out / "metrics.json", metrics_to_json(m));
  io::write_text(out / "per_class.csv", per_class_csv(m));
  std::cout << metrics_table(m);
  return 0;
}

struct Grid {
  double lo = 0, hi = 0, step = 0;
};

Grid parse_grid(const std::string& text) {
  Grid g;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  require(parts.size() == 3, "grid must be lo:hi:step, got '" + text + "'");
  g.lo = io::parse_double(parts[0]);
  g.hi = io::parse_double(parts[1]);
  g.step = io::parse_double(parts[2]);
  require(g.step > 0.0 && g.hi >= g.lo, "grid needs step > 0 and hi >= lo");
  return g;
}

int cmd_theory(const std::string& grid_text, const theory::GaussianMixSpec& spec, std::optional<double> theta0,
               std::size_t steps, const std::string& table_out, const std::string& trace_out) {
  const Grid grid = parse_grid(grid_text);
  spec.validate();
  // round so that 0:5:0.01 gives exactly 501 points
  const auto n = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  std::ostringstream table;
  table << "x,contraction_rate\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.lo + static_cast<double>(i) * grid.step;
    table << io::format_double(x) << ',' << io::format_double(theory::contraction_rate(x)) << '\n';
  }
  const double start = theta0 ? *theta0 : spec.balanced_boundary() + 0.01;
  const auto tr = theory::run_trace(spec, start, steps);
  std::ostringstream trace;
  trace << "t,theta,ratio\n";
  for (std::size_t t = 0; t < tr.thetas.size(); ++t) {
    trace << t << ',' << io::format_double(tr.thetas[t]) << ',';
    if (t < tr.ratios.size()) trace << io::format_double(tr.ratios[t]);
    trace << '\n';
  }
  if (table_out.empty()) {
    std::cout << table.str();
  } else {
    io::write_text(table_out, table.str());
  }
  if (trace_out.empty()) {
    std::cout << '\n' << trace.str();
  } else {
    io::write_text(trace_out, trace.str());
  }
  return 0;
}

int cmd_pagerank(const fs::path& data_dir, const fs::path& out, const PageRankParams& params) {
  require_dir(data_dir);
  Graph g = io::load_graph_dir(data_dir);
  CentralityScores s = pagerank(g, params);
  std::string text = "id\tscore\n";
  for (std::size_t u = 0; u < s.scores.size(); ++u) text += std::to_string(u) + '\t' + io::format_double(s.scores[u]) + '\n';
  io::write_text(out, text);
  spdlog::info("pagerank: {} iterations, residual {:.3g}", s.iterations, s.residual);
  return 0;
}

int cmd_cluster(const fs::path& embeddings, std::size_t k, std::optional<std::size_t> min_size, std::uint64_t seed,
                const fs::path& out) {
  Matrix points = io::load_matrix_tsv(embeddings);
  KMeansOptions opt;
  opt.seed = seed;
  opt.min_size = min_size ? *min_size : default_min_cluster_size(static_cast<std::size_t>(points.rows()), k);
  ClusterAssignment a = constrained_kmeans(points, k, opt);
  std::string text = "id\tcluster\n";
  for (std::size_t u = 0; u < a.labels.size(); ++u) text += std::to_string(u) + '\t' + std::to_string(a.labels[u]) + '\n';
  io::write_text(out, text);
  spdlog::info("cluster: objective {:.6g} after {} iterations", a.objective, a.iterations);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"imgcl: imbalanced graph contrastive learning toolkit"};
  app.require_subcommand(1);

  Overrides gen_o, train_o;
  fs::path gen_out, train_data, train_out, eval_data, eval_run, eval_out, pr_data, pr_out, cl_emb, cl_out;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic imbalanced SBM graph with splits");
  add_config_options(gen, gen_o);
  add_data_options(gen, gen_o);
  gen->add_option("--out", gen_out, "Output directory")->required();

  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
  auto* tr = app.add_subcommand("train", "Train an encoder (ImGCL or Baseline)");
  add_config_options(tr, train_o);
  add_train_options(tr, train_o);
  tr->add_option("--sampling", train_o.sampling, "Probe sampling recorded for eval: auto, none, balanced, progressive");
  tr->add_option("--data", train_data, "Graph directory")->required();
  tr->add_option("--out", train_out, "Output directory")->required();
  tr->add_option("--seeds", seeds, "Train one run per seed into out/seed_<s>")->delimiter(',');
  tr->add_option("--jobs", jobs, "Worker threads for --seeds")->check(CLI::PositiveNumber);

  std::optional<std::string> eval_sampling;
  auto* ev = app.add_subcommand("eval", "Linear-probe evaluation of trained embeddings");
  ev->add_option("--data", eval_data, "Graph directory with splits.json")->required();
  ev->add_option("--run", eval_run, "Train output directory")->required();
  ev->add_option("--out", eval_out, "Output directory")->required();
  ev->add_option("--sampling", eval_sampling, "Override the probe sampling");

  std::string grid = "0:5:0.01", table_out, trace_out;
  theory::GaussianMixSpec spec;
  spec.mu2 = 0.2;
  spec.p_pos = 0.6;
  std::optional<double> theta0;
  std::size_t steps = 10;
  auto* th = app.add_subcommand("theory", "Contraction-rate table and boundary trace as CSV");
  th->add_option("--x-grid", grid, "lo:hi:step")->capture_default_str();
  th->add_option("--mu1", spec.mu1)->capture_default_str();
  th->add_option("--mu2", spec.mu2)->capture_default_str();
  th->add_option("--sigma", spec.sigma)->capture_default_str();
  th->add_option("--p-pos", spec.p_pos)->capture_default_str();
  th->add_option("--theta0", theta0, "Trace start (default midpoint + 0.01)");
  th->add_option("--steps", steps)->capture_default_str();
  th->add_option("--table-out", table_out, "Write the table here instead of stdout");
  th->add_option("--trace-out", trace_out, "Write the trace here instead of stdout");

  PageRankParams pr_params;
  auto* pr = app.add_subcommand("pagerank", "Unnormalized PageRank centrality");
  pr->add_option("--data", pr_data, "Graph directory")->required();
  pr->add_option("--out", pr_out, "Output TSV")->required();
  pr->add_option("--damping", pr_params.damping)->capture_default_str();
  pr->add_option("--tol", pr_params.tol)->capture_default_str();
  pr->add_option("--max-iter", pr_params.max_iter)->capture_default_str();

  std::size_t k = 0;
  std::optional<std::size_t> min_size;
  std::uint64_t cl_seed = 0;
  auto* cl = app.add_subcommand("cluster", "Size-constrained k-means on an embedding table");
  cl->add_option("--embeddings", cl_emb, "Embedding TSV")->required();
  cl->add_option("--k", k, "Number of clusters")->required();
  cl->add_option("--min-size", min_size, "Minimum cluster size (default N/(4K))");
  cl->add_option("--seed", cl_seed);
  cl->add_option("--out", cl_out, "Output TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return cmd_gen(gen_o, gen_out);
    if (*tr) return cmd_train(train_o, train_data, train_out, seeds, jobs);
    if (*ev) return cmd_eval(eval_data, eval_run, eval_out, eval_sampling);
    if (*th) return cmd_theory(grid, spec, theta0, steps, table_out, trace_out);
    if (*pr) return cmd_pagerank(pr_data, pr_out, pr_params);
    if (*cl) return cmd_cluster(cl_emb, k, min_size, cl_seed, cl_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
