#include "imgcl/encoder.hpp"

#include "imgcl/rng.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace imgcl {

static_assert(std::endian::native == std::endian::little, "weight files assume little-endian");

void EncoderState::validate() const {
  require(weights[0].rows() > 0 && weights[0].cols() > 0 && weights[1].cols() > 0,
          "encoder layers must be non-empty");
  require(weights[0].cols() == weights[1].rows(), "encoder layer dimensions must chain");
  require(weights[0].allFinite() && weights[1].allFinite(), "encoder weights must be finite");
}

EncoderState init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                          std::uint64_t seed) {
  require(input_dim > 0 && hidden_dim > 0 && output_dim > 0, "encoder dims must be positive");
  EncoderState state;
  state.seed = seed;
  Rng rng = make_rng(seed, "encoder.init");
  const std::array<std::pair<std::size_t, std::size_t>, 2> dims{
      {{input_dim, hidden_dim}, {hidden_dim, output_dim}}};
  for (std::size_t l = 0; l < 2; ++l) {
    const auto [fan_in, fan_out] = dims[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    state.weights[l] = std::move(w);
  }
  return state;
}

void AugmentationConfig::validate() const {
  require(edge_drop_prob >= 0.0 && edge_drop_prob < 1.0, "edge_drop_prob must be in [0, 1)");
  require(feature_mask_prob >= 0.0 && feature_mask_prob < 1.0,
          "feature_mask_prob must be in [0, 1)");
}

Graph augment(const Graph& g, const AugmentationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.edge_drop_prob == 0.0 && cfg.feature_mask_prob == 0.0) return g;
  Rng rng = make_rng(seed, "augment");
  std::vector<Edge> kept;
  for (const Edge& e : g.edge_list()) {
    if (uniform01(rng) >= cfg.edge_drop_prob) kept.push_back(e);
  }
  Matrix x = g.features();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (uniform01(rng) < cfg.feature_mask_prob) x.col(j).setZero();
  }
  return build_graph(kept, std::move(x));
}

ForwardPass forward_pass(const EncoderState& state, const Graph& g) {
  if (g.feature_dim() != state.input_dim()) {
    throw ValidationError("feature dimension " + std::to_string(g.feature_dim()) +
                          " does not match encoder input " + std::to_string(state.input_dim()));
  }
  ForwardPass pass;
  pass.adjacency = normalized_adjacency(g);
  pass.propagated_input = pass.adjacency.apply(g.features());
  pass.pre_activation = pass.propagated_input * state.weights[0];
  pass.propagated_hidden = pass.adjacency.apply(pass.pre_activation.cwiseMax(0.0));
  pass.output = pass.propagated_hidden * state.weights[1];
  return pass;
}

Matrix forward(const EncoderState& state, const Graph& g) { return forward_pass(state, g).output; }

EncoderGradients backward(const EncoderState& state, const ForwardPass& pass,
                          const Matrix& grad_output) {
  if (grad_output.rows() != pass.output.rows() || grad_output.cols() != pass.output.cols()) {
    throw ValidationError("dL/dZ shape does not match the encoder output");
  }
  EncoderGradients grads;
  grads[1] = pass.propagated_hidden.transpose() * grad_output;
  // A_hat is symmetric, so its transpose is itself
  Matrix grad_hidden = pass.adjacency.apply(grad_output * state.weights[1].transpose());
  Matrix grad_pre = (pass.pre_activation.array() > 0.0).select(grad_hidden, 0.0);
  grads[0] = pass.propagated_input.transpose() * grad_pre;
  return grads;
}

EncoderGradients backward(const EncoderState& state, const Graph& g, const Matrix& grad_output) {
  return backward(state, forward_pass(state, g), grad_output);
}

namespace {
constexpr char kMagic[8] = {'I', 'M', 'G', 'C', 'L', 'W', '0', '1'};
}

void save_weights(const EncoderState& state, const std::filesystem::path& file) {
  state.validate();
  nlohmann::json header = {
      {"dims", {state.input_dim(), state.hidden_dim(), state.output_dim()}},
      {"seed", state.seed},
      {"layers", {"W0", "W1"}},
      {"dtype", "f64le"},
  };
  const std::string text = header.dump();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + file.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& w : state.weights) {
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(w.size() * sizeof(double)));
  }
}

EncoderState load_weights(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || len > (1u << 20)) {
    throw ValidationError("not an encoder weight file: " + file.string());
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  EncoderState state;
  try {
    auto header = nlohmann::json::parse(text);
    auto dims = header.at("dims").get<std::vector<std::size_t>>();
    require(dims.size() == 3, "weight header dims must have three entries");
    state.seed = header.at("seed").get<std::uint64_t>();
    state.weights[0] = Matrix(dims[0], dims[1]);
    state.weights[1] = Matrix(dims[1], dims[2]);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid weight header: " + std::string(e.what()));
  }
  for (auto& w : state.weights) {
    in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
  }
  if (!in) throw ValidationError("truncated weight file: " + file.string());
  state.validate();
  return state;
}

}  // namespace imgcl
