#pragma once

#include "imgcl/common.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace imgcl {

using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected graph: symmetric CSR adjacency without self-loops,
/// a dense N x d feature matrix and optional per-node class labels.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  /// Number of undirected edges.
  std::size_t num_edges() const { return indices_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {indices_.data() + indptr_[u], indptr_[u + 1] - indptr_[u]};
  }
  std::size_t degree(NodeId u) const { return indptr_[u + 1] - indptr_[u]; }
  std::vector<std::size_t> degrees() const;

  const std::vector<std::size_t>& indptr() const { return indptr_; }
  const std::vector<NodeId>& indices() const { return indices_; }
  const Matrix& features() const { return features_; }

  bool has_labels() const { return labels_.has_value(); }
  /// Throws ValidationError when the graph is unlabeled.
  const std::vector<int>& labels() const;
  int num_classes() const { return num_classes_; }

  /// Undirected edges as (u, v) with u < v, sorted lexicographically.
  std::vector<Edge> edge_list() const;

  bool has_edge(NodeId u, NodeId v) const;

  /// Returns a copy with the same topology and labels but new features.
  Graph with_features(Matrix features) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  friend Graph build_graph(std::span<const Edge>, Matrix, std::optional<std::vector<int>>,
                           std::optional<int>);
  friend Graph make_graph_unchecked(std::vector<std::size_t>, std::vector<NodeId>, Matrix,
                                    std::optional<std::vector<int>>, int);

  std::vector<std::size_t> indptr_{0};
  std::vector<NodeId> indices_;
  Matrix features_;
  std::optional<std::vector<int>> labels_;
  int num_classes_ = 0;
};

/// Per-node selection bitmap drawn over a graph.
class NodeMask {
 public:
  NodeMask() = default;
  explicit NodeMask(std::vector<bool> bits);
  static NodeMask full(std::size_t n);
  static NodeMask from_ids(std::size_t n, std::span<const NodeId> ids);

  std::size_t size() const { return bits_.size(); }
  std::size_t count() const { return count_; }
  bool operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<bool>& bits() const { return bits_; }
  std::vector<NodeId> selected() const;

  NodeMask operator&(const NodeMask& other) const;
  friend bool operator==(const NodeMask&, const NodeMask&) = default;

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

/// Builds a graph from an edge list. Reversed and duplicate edges collapse to
/// one undirected edge and self-loops are dropped. If labels are given without
/// `num_classes`, K is inferred as max label + 1; every class in [0, K) must
/// occur at least once.
Graph build_graph(std::span<const Edge> edges, Matrix features,
                  std::optional<std::vector<int>> labels = std::nullopt,
                  std::optional<int> num_classes = std::nullopt);

/// Converts per-node feature rows to a matrix; rejects ragged rows.
Matrix features_from_rows(const std::vector<std::vector<double>>& rows);

/// Sparse symmetric operator D^-1/2 (A + I) D^-1/2 in CSR form, diagonal included.
struct NormalizedAdjacency {
  std::vector<std::size_t> indptr;
  std::vector<NodeId> indices;
  std::vector<double> values;

  std::size_t size() const { return indptr.size() - 1; }
  /// Returns this * x. Rows are reduced in fixed neighbor order.
  Matrix apply(const Matrix& x) const;
  double coeff(NodeId row, NodeId col) const;
  Matrix to_dense() const;
};

NormalizedAdjacency normalized_adjacency(const Graph& g);

struct Subgraph {
  Graph graph;
  /// original_ids[i] is the id in the parent graph of subgraph node i.
  std::vector<NodeId> original_ids;
};

/// Keeps selected nodes (renumbered densely in original order) and the edges
/// between them. Labels are sliced; classes may be absent in the result.
Subgraph induced_subgraph(const Graph& g, const NodeMask& mask);

}  // namespace imgcl
