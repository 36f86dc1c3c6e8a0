#include "imgcl/graph_io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace imgcl::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("cannot parse " + what + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("cannot parse number: '" + std::string(text) + "'");
  }
  return value;
}

void write_text(const fs::path& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << text;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_graph_dir(const Graph& g, const fs::path& dir) {
  fs::create_directories(dir);
  std::string edges;
  for (auto [u, v] : g.edge_list()) {
    edges += std::to_string(u) + '\t' + std::to_string(v) + '\n';
  }
  write_text(dir / "edges.tsv", edges);
  save_matrix_tsv(g.features(), dir / "features.tsv");
  json meta = {{"num_nodes", g.num_nodes()}, {"feature_dim", g.feature_dim()}};
  if (g.has_labels()) {
    std::string labels;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      labels += std::to_string(i) + '\t' + std::to_string(g.labels()[i]) + '\n';
    }
    write_text(dir / "labels.tsv", labels);
    meta["num_classes"] = g.num_classes();
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void save_matrix_tsv(const Matrix& m, const fs::path& file) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += '\t';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text(file, out);
}

Matrix load_matrix_tsv(const fs::path& file) {
  auto lines = read_lines(file);
  std::map<std::size_t, std::vector<double>> rows;
  for (const auto& line : lines) {
    auto fields = split_tabs(line);
    auto id = parse_int<std::size_t>(fields[0], "row id in " + file.string());
    std::vector<double> values;
    for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(parse_double(fields[j]));
    if (!rows.emplace(id, std::move(values)).second) {
      throw ValidationError("duplicate row id " + std::to_string(id) + " in " + file.string());
    }
  }
  std::vector<std::vector<double>> dense;
  dense.reserve(rows.size());
  std::size_t expect = 0;
  for (auto& [id, values] : rows) {
    if (id != expect) {
      throw ValidationError("missing row " + std::to_string(expect) + " in " + file.string());
    }
    dense.push_back(std::move(values));
    ++expect;
  }
  return features_from_rows(dense);
}

Graph load_graph_dir(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(read_text(dir / "meta.json"));
  } catch (const json::exception& e) {
    throw ValidationError("invalid meta.json: " + std::string(e.what()));
  }
  if (!meta.contains("num_nodes") || !meta.contains("feature_dim")) {
    throw ValidationError("meta.json must contain num_nodes and feature_dim");
  }
  const auto n = meta.at("num_nodes").get<std::size_t>();
  const auto d = meta.at("feature_dim").get<std::size_t>();

  Matrix features = load_matrix_tsv(dir / "features.tsv");
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw ValidationError("meta.json num_nodes=" + std::to_string(n) + " but features.tsv has " +
                          std::to_string(features.rows()) + " rows");
  }
  if (static_cast<std::size_t>(features.cols()) != d && n > 0) {
    throw ValidationError("meta.json feature_dim=" + std::to_string(d) +
                          " but features.tsv has width " + std::to_string(features.cols()));
  }

  std::vector<Edge> edges;
  for (const auto& line : read_lines(dir / "edges.tsv")) {
    auto fields = split_tabs(line);
    if (fields.size() != 2) throw ValidationError("edges.tsv line must be 'u<TAB>v': " + line);
    edges.emplace_back(parse_int<NodeId>(fields[0], "edge endpoint"),
                       parse_int<NodeId>(fields[1], "edge endpoint"));
  }

  std::optional<std::vector<int>> labels;
  std::optional<int> k;
  if (meta.contains("num_classes")) k = meta.at("num_classes").get<int>();
  if (fs::exists(dir / "labels.tsv")) {
    labels.emplace(n, -1);
    for (const auto& line : read_lines(dir / "labels.tsv")) {
      auto fields = split_tabs(line);
      if (fields.size() != 2) throw ValidationError("labels.tsv line must be 'id<TAB>label'");
      auto id = parse_int<std::size_t>(fields[0], "label id");
      if (id >= n) throw ValidationError("label id out of range: " + std::to_string(id));
      (*labels)[id] = parse_int<int>(fields[1], "label");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if ((*labels)[i] < 0) throw ValidationError("node " + std::to_string(i) + " has no label");
    }
    if (!k) throw ValidationError("labels.tsv present but meta.json lacks num_classes");
  }
  return build_graph(edges, std::move(features), std::move(labels), k);
}

}  // namespace imgcl::io
