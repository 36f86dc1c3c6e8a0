#pragma once

#include "imgcl/graph.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace imgcl::io {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Graph directory layout:
///   edges.tsv     "u<TAB>v" per undirected edge, 0-based
///   features.tsv  "id<TAB>x_1<TAB>...<TAB>x_d" per node
///   labels.tsv    "id<TAB>label" (optional)
///   meta.json     {"num_nodes": N, "feature_dim": d, "num_classes": K}
void save_graph_dir(const Graph& g, const std::filesystem::path& dir);

/// Loads and validates a graph directory. Metadata that disagrees with the
/// table contents raises ValidationError.
Graph load_graph_dir(const std::filesystem::path& dir);

/// Embedding tables: "id<TAB>z_1<TAB>...".
void save_matrix_tsv(const Matrix& m, const std::filesystem::path& file);
Matrix load_matrix_tsv(const std::filesystem::path& file);

void write_text(const std::filesystem::path& file, std::string_view text);
std::string read_text(const std::filesystem::path& file);

}  // namespace imgcl::io
