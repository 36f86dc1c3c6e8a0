#pragma once

#include "imgcl/common.hpp"

#include <string>

namespace imgcl {

enum class ObjectiveKind { InfoNCE, Decorrelation };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

struct ContrastConfig {
  double temperature = 0.5;
  /// Weight of the off-diagonal decorrelation term; negative means 1/d_out.
  double lambda_offdiag = -1.0;
  ObjectiveKind kind = ObjectiveKind::InfoNCE;

  void validate() const;
  double lambda_for(std::size_t dim) const {
    return lambda_offdiag < 0.0 ? 1.0 / static_cast<double>(dim) : lambda_offdiag;
  }
};

struct PairLoss {
  double value = 0.0;
  Matrix grad_first;   // dL/dZ
  Matrix grad_second;  // dL/dZ'
  /// Decorrelation only: dimensions whose variance hit the 1e-8 floor.
  std::size_t floored_dims = 0;
};

struct RowNormalized {
  Matrix values;
  Vector norms;
};

/// Scales each row to unit L2 norm (norms are floored at 1e-12).
RowNormalized l2_normalize_rows(const Matrix& z);
/// Gradient with respect to the raw rows given the gradient at the normalized rows.
Matrix l2_normalize_rows_backward(const RowNormalized& normalized, const Matrix& grad_normalized);

/// Symmetrized cross-view InfoNCE. For anchor u in one view the positive is
/// node u in the other view and the other view's remaining nodes are
/// negatives; similarities are exp(z_u . z'_n / tau). Per-anchor losses are
/// averaged over both anchoring directions.
PairLoss infonce_loss(const Matrix& z, const Matrix& z_other, double temperature);

/// Both views are standardized per dimension over the batch; with
/// C = Zs^T Zs' / N the loss is sum_i (1 - C_ii)^2 + lambda sum_{i!=j} C_ij^2.
PairLoss decorrelation_loss(const Matrix& z, const Matrix& z_other, double lambda);

}  // namespace imgcl
