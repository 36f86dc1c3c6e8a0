#include "imgcl/graph.hpp"
#include "imgcl/graph_io.hpp"
#include "imgcl/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace imgcl;

namespace {

Graph random_graph(std::size_t n, double p, std::uint64_t seed, std::size_t d = 3) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.emplace_back(u, v);
    }
  }
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng);
  return build_graph(edges, std::move(x));
}

Graph path3() {
  std::vector<Edge> e{{0, 1}, {1, 2}};
  return build_graph(e, Matrix::Zero(3, 1));
}

Graph triangle() {
  std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
  return build_graph(e, Matrix::Zero(3, 1));
}

NodeMask random_mask(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<bool> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = uniform01(rng) < 0.6;
  bits[0] = true;
  return NodeMask(bits);
}

}  // namespace

TEST_CASE("build_graph collapses reversed edges and drops self-loops") {
  std::vector<Edge> e{{0, 1}, {1, 0}, {1, 1}};
  Graph g = build_graph(e, Matrix::Zero(2, 1));
  CHECK(g.num_edges() == 1);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(1, 1));
  CHECK(g.edge_list() == std::vector<Edge>{{0, 1}});
}

TEST_CASE("build_graph with no edges gives isolated nodes") {
  Graph g = build_graph({}, Matrix::Zero(3, 2));
  CHECK(g.num_nodes() == 3);
  CHECK(g.degrees() == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("degrees of a 3-path") {
  CHECK(path3().degrees() == std::vector<std::size_t>{1, 2, 1});
}

TEST_CASE("build_graph rejects bad inputs") {
  std::vector<Edge> bad{{0, 5}};
  CHECK_THROWS_AS(build_graph(bad, Matrix::Zero(2, 1)), ValidationError);
  CHECK_THROWS_AS(features_from_rows({{1.0, 2.0}, {3.0}}), ValidationError);
  CHECK_THROWS_AS(build_graph({}, Matrix::Zero(2, 1), std::vector<int>{0, 3}, 2), ValidationError);
  CHECK_THROWS_AS(build_graph({}, Matrix::Zero(2, 1), std::vector<int>{0, -1}), ValidationError);
  // class 1 of K=3 never occurs
  CHECK_THROWS_AS(build_graph({}, Matrix::Zero(2, 1), std::vector<int>{0, 2}, 3), ValidationError);
}

TEST_CASE("normalized adjacency hand examples") {
  SUBCASE("single node") {
    auto a = normalized_adjacency(build_graph({}, Matrix::Zero(1, 1)));
    CHECK(a.to_dense()(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("one edge") {
    std::vector<Edge> e{{0, 1}};
    Matrix a = normalized_adjacency(build_graph(e, Matrix::Zero(2, 1))).to_dense();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("3-path") {
    auto a = normalized_adjacency(path3());
    CHECK(a.coeff(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a.coeff(0, 1) == doctest::Approx(1.0 / (std::sqrt(2.0) * std::sqrt(3.0))).epsilon(1e-15));
    CHECK(a.coeff(0, 2) == 0.0);
  }
}

TEST_CASE("normalized adjacency is exactly symmetric with spectral radius <= 1") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Matrix a = normalized_adjacency(random_graph(30, 0.15, seed)).to_dense();
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("induced_subgraph examples") {
  SUBCASE("full mask is the identity") {
    Graph g = random_graph(12, 0.3, 7);
    auto sub = induced_subgraph(g, NodeMask::full(12));
    CHECK(sub.graph == g);
    for (NodeId i = 0; i < 12; ++i) CHECK(sub.original_ids[i] == i);
  }
  SUBCASE("3-path endpoints lose their shared neighbor") {
    std::vector<NodeId> ids{0, 2};
    auto sub = induced_subgraph(path3(), NodeMask::from_ids(3, ids));
    CHECK(sub.graph.num_nodes() == 2);
    CHECK(sub.graph.num_edges() == 0);
    CHECK(sub.original_ids == ids);
  }
  SUBCASE("triangle restricted to two nodes keeps one edge") {
    std::vector<NodeId> ids{0, 1};
    auto sub = induced_subgraph(triangle(), NodeMask::from_ids(3, ids));
    CHECK(sub.graph.num_edges() == 1);
  }
  SUBCASE("empty mask is an error") {
    CHECK_THROWS_AS(induced_subgraph(path3(), NodeMask(std::vector<bool>(3, false))), ValidationError);
  }
}

TEST_CASE("induced_subgraph composes like mask intersection") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Graph g = random_graph(25, 0.2, seed);
    NodeMask m1 = random_mask(25, seed * 31);
    NodeMask m2 = random_mask(25, seed * 57);
    NodeMask both = m1 & m2;
    if (both.count() == 0) continue;
    auto outer = induced_subgraph(g, m1);
    // m2 restricted to the nodes kept by m1
    std::vector<bool> lifted;
    for (NodeId id : outer.original_ids) lifted.push_back(m2[id]);
    auto nested = induced_subgraph(outer.graph, NodeMask(lifted));
    auto direct = induced_subgraph(g, both);
    CHECK(nested.graph == direct.graph);
  }
}

TEST_CASE("edge list round-trips through build_graph") {
  Graph g = random_graph(40, 0.1, 3);
  auto edges = g.edge_list();
  CHECK(build_graph(edges, g.features()) == g);
}

TEST_CASE("graph directory round-trip and metadata checks") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "imgcl_test_graph_dir";
  fs::remove_all(dir);
  Graph g = random_graph(20, 0.2, 11);
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  g = build_graph(g.edge_list(), g.features(), labels, 3);
  io::save_graph_dir(g, dir);
  CHECK(io::load_graph_dir(dir) == g);

  io::write_text(dir / "meta.json", R"({"num_nodes": 21, "feature_dim": 3, "num_classes": 3})");
  CHECK_THROWS_AS(io::load_graph_dir(dir), ValidationError);
  io::write_text(dir / "meta.json", R"({"num_nodes": 20, "feature_dim": 4, "num_classes": 3})");
  CHECK_THROWS_AS(io::load_graph_dir(dir), ValidationError);
  io::write_text(dir / "meta.json", R"({"num_nodes": 20, "feature_dim": 3, "num_classes": 2})");
  CHECK_THROWS_AS(io::load_graph_dir(dir), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(uniform01(rng) * 20) - 10);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
}
