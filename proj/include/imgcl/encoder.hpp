#pragma once

#include "imgcl/graph.hpp"

#include <array>
#include <cstdint>
#include <filesystem>

namespace imgcl {

/// Two-layer GCN: Z = A_hat * relu(A_hat * X * W0) * W1.
struct EncoderState {
  std::array<Matrix, 2> weights;  // d x h, h x d_out
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(weights[0].rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(weights[0].cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights[1].cols()); }
  void validate() const;
};

using EncoderGradients = std::array<Matrix, 2>;

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)).
EncoderState init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                          std::uint64_t seed);

struct AugmentationConfig {
  double edge_drop_prob = 0.2;
  double feature_mask_prob = 0.2;

  void validate() const;
};

/// Drops each undirected edge with edge_drop_prob and zeroes each feature
/// column (for all nodes) with feature_mask_prob. Views carry no labels; the
/// identity shortcut (both probabilities zero) returns g unchanged.
Graph augment(const Graph& g, const AugmentationConfig& cfg, std::uint64_t seed);

/// Intermediate values kept for the backward pass.
struct ForwardPass {
  NormalizedAdjacency adjacency;
  Matrix propagated_input;   // A_hat X
  Matrix pre_activation;     // A_hat X W0
  Matrix propagated_hidden;  // A_hat relu(pre)
  Matrix output;             // Z
};

ForwardPass forward_pass(const EncoderState& state, const Graph& g);
Matrix forward(const EncoderState& state, const Graph& g);

/// Exact gradients of a scalar loss with respect to W0 and W1 given dL/dZ.
EncoderGradients backward(const EncoderState& state, const ForwardPass& pass, const Matrix& grad_output);
EncoderGradients backward(const EncoderState& state, const Graph& g, const Matrix& grad_output);

/// Binary weight file: 8-byte magic "IMGCLW01", little-endian u64 header
/// length, a JSON header {"dims": [d, h, d_out], "seed": s,
/// "layers": ["W0", "W1"], "dtype": "f64le"}, then each layer row-major.
void save_weights(const EncoderState& state, const std::filesystem::path& file);
EncoderState load_weights(const std::filesystem::path& file);

}  // namespace imgcl
