#include "imgcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace imgcl {

Graph make_graph_unchecked(std::vector<std::size_t> indptr, std::vector<NodeId> indices,
                           Matrix features, std::optional<std::vector<int>> labels,
                           int num_classes) {
  Graph g;
  g.indptr_ = std::move(indptr);
  g.indices_ = std::move(indices);
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  return g;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(num_nodes());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = indptr_[u + 1] - indptr_[u];
  return out;
}

const std::vector<int>& Graph::labels() const {
  if (!labels_) throw ValidationError("graph has no labels");
  return *labels_;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::with_features(Matrix features) const {
  require(static_cast<std::size_t>(features.rows()) == num_nodes(),
          "feature matrix must keep one row per node");
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.indptr_ == b.indptr_ && a.indices_ == b.indices_ &&
         a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_ && a.labels_ == b.labels_ && a.num_classes_ == b.num_classes_;
}

NodeMask::NodeMask(std::vector<bool> bits) : bits_(std::move(bits)) {
  count_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

NodeMask NodeMask::full(std::size_t n) { return NodeMask(std::vector<bool>(n, true)); }

NodeMask NodeMask::from_ids(std::size_t n, std::span<const NodeId> ids) {
  std::vector<bool> bits(n, false);
  for (NodeId id : ids) {
    require(id < n, "mask id out of range");
    bits[id] = true;
  }
  return NodeMask(std::move(bits));
}

std::vector<NodeId> NodeMask::selected() const {
  std::vector<NodeId> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

NodeMask NodeMask::operator&(const NodeMask& other) const {
  require(size() == other.size(), "mask length mismatch");
  std::vector<bool> bits(size());
  for (std::size_t i = 0; i < size(); ++i) bits[i] = bits_[i] && other.bits_[i];
  return NodeMask(std::move(bits));
}

Matrix features_from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  Matrix x(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw ValidationError("ragged feature rows: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " values, expected " +
                            std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rows[i][j];
  }
  return x;
}

Graph build_graph(std::span<const Edge> edges, Matrix features,
                  std::optional<std::vector<int>> labels, std::optional<int> num_classes) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (!features.allFinite()) throw ValidationError("features contain non-finite values");

  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ValidationError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") with N=" + std::to_string(n));
    }
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  std::vector<std::size_t> indptr(n + 1, 0);
  std::vector<NodeId> indices;
  indices.reserve(directed.size());
  for (auto [u, v] : directed) {
    ++indptr[u + 1];
    indices.push_back(v);
  }
  for (std::size_t i = 0; i < n; ++i) indptr[i + 1] += indptr[i];

  int k = 0;
  if (labels) {
    require(labels->size() == n, "label count must equal the number of nodes");
    int max_label = -1;
    for (int y : *labels) {
      if (y < 0) throw ValidationError("label out of range: " + std::to_string(y));
      max_label = std::max(max_label, y);
    }
    k = num_classes.value_or(max_label + 1);
    require(k >= 1, "num_classes must be positive");
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (int y : *labels) {
      if (y >= k) {
        throw ValidationError("label out of range: " + std::to_string(y) + " >= K=" +
                              std::to_string(k));
      }
      seen[static_cast<std::size_t>(y)] = true;
    }
    for (int c = 0; c < k; ++c) {
      if (!seen[static_cast<std::size_t>(c)]) {
        throw ValidationError("class " + std::to_string(c) + " has no nodes");
      }
    }
  } else if (num_classes) {
    k = *num_classes;
  }
  return make_graph_unchecked(std::move(indptr), std::move(indices), std::move(features),
                              std::move(labels), k);
}

Matrix NormalizedAdjacency::apply(const Matrix& x) const {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t u = 0; u < size(); ++u) {
    auto row = out.row(static_cast<Eigen::Index>(u));
    for (std::size_t e = indptr[u]; e < indptr[u + 1]; ++e) {
      row.noalias() += values[e] * x.row(indices[e]);
    }
  }
  return out;
}

double NormalizedAdjacency::coeff(NodeId row, NodeId col) const {
  auto first = indices.begin() + static_cast<std::ptrdiff_t>(indptr[row]);
  auto last = indices.begin() + static_cast<std::ptrdiff_t>(indptr[row + 1]);
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

Matrix NormalizedAdjacency::to_dense() const {
  Matrix out = Matrix::Zero(size(), size());
  for (std::size_t u = 0; u < size(); ++u) {
    for (std::size_t e = indptr[u]; e < indptr[u + 1]; ++e) out(u, indices[e]) = values[e];
  }
  return out;
}

NormalizedAdjacency normalized_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t u = 0; u < n; ++u) {
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(static_cast<NodeId>(u)) + 1));
  }
  NormalizedAdjacency a;
  a.indptr.assign(n + 1, 0);
  a.indices.reserve(2 * g.num_edges() + n);
  a.values.reserve(2 * g.num_edges() + n);
  for (NodeId u = 0; u < n; ++u) {
    bool diag_done = false;
    auto push_diag = [&] {
      a.indices.push_back(u);
      a.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
      diag_done = true;
    };
    for (NodeId v : g.neighbors(u)) {
      if (!diag_done && v > u) push_diag();
      a.indices.push_back(v);
      // the product is commutative in IEEE arithmetic, so entry (u,v) == (v,u)
      a.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
    }
    if (!diag_done) push_diag();
    a.indptr[u + 1] = a.indices.size();
  }
  return a;
}

Subgraph induced_subgraph(const Graph& g, const NodeMask& mask) {
  require(mask.size() == g.num_nodes(), "mask length must equal the number of nodes");
  if (mask.count() == 0) throw ValidationError("empty mask: no nodes selected");

  constexpr NodeId kAbsent = static_cast<NodeId>(-1);
  std::vector<NodeId> remap(g.num_nodes(), kAbsent);
  Subgraph sub;
  sub.original_ids = mask.selected();
  for (std::size_t i = 0; i < sub.original_ids.size(); ++i) {
    remap[sub.original_ids[i]] = static_cast<NodeId>(i);
  }

  const std::size_t m = sub.original_ids.size();
  std::vector<std::size_t> indptr(m + 1, 0);
  std::vector<NodeId> indices;
  Matrix features(m, g.feature_dim());
  std::optional<std::vector<int>> labels;
  if (g.has_labels()) labels.emplace(m);
  for (std::size_t i = 0; i < m; ++i) {
    const NodeId old = sub.original_ids[i];
    for (NodeId v : g.neighbors(old)) {
      if (remap[v] != kAbsent) indices.push_back(remap[v]);
    }
    indptr[i + 1] = indices.size();
    features.row(static_cast<Eigen::Index>(i)) = g.features().row(old);
    if (labels) (*labels)[i] = g.labels()[old];
  }
  sub.graph = make_graph_unchecked(std::move(indptr), std::move(indices), std::move(features),
                                   std::move(labels), g.num_classes());
  return sub;
}

}  // namespace imgcl
