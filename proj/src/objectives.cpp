#include "imgcl/objectives.hpp"

#include "imgcl/log.hpp"

#include <cmath>

namespace imgcl {

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::InfoNCE ? "infonce" : "decorrelation";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "infonce" || name == "InfoNCE") return ObjectiveKind::InfoNCE;
  if (name == "decorrelation" || name == "Decorrelation") return ObjectiveKind::Decorrelation;
  throw ValidationError("objective must be 'infonce' or 'decorrelation', got '" + name + "'");
}

void ContrastConfig::validate() const {
  require(temperature > 0.0, "temperature must satisfy tau > 0");
}

RowNormalized l2_normalize_rows(const Matrix& z) {
  RowNormalized out;
  out.norms = z.rowwise().norm().cwiseMax(1e-12);
  out.values = z.array().colwise() / out.norms.array();
  return out;
}

Matrix l2_normalize_rows_backward(const RowNormalized& normalized, const Matrix& grad_normalized) {
  // d(z/|z|) = (g - y (y . g)) / |z|
  const Vector dots = (normalized.values.array() * grad_normalized.array()).rowwise().sum();
  Matrix g = grad_normalized - (normalized.values.array().colwise() * dots.array()).matrix();
  return g.array().colwise() / normalized.norms.array();
}

namespace {

void check_pair(const Matrix& z, const Matrix& z_other) {
  if (z.rows() != z_other.rows() || z.cols() != z_other.cols()) {
    throw ValidationError("view embeddings must have the same shape");
  }
  require(z.rows() >= 1, "need at least one node");
}

}  // namespace

PairLoss infonce_loss(const Matrix& z, const Matrix& z_other, double temperature) {
  check_pair(z, z_other);
  require(temperature > 0.0, "temperature must satisfy tau > 0");
  const Eigen::Index rows = z.rows();
  const auto n = static_cast<double>(rows);
  Matrix logits = z * z_other.transpose();
  logits /= temperature;
  const double diag = logits.diagonal().sum();

  // anchors in the second view normalize over columns
  Eigen::RowVectorXd col_max = logits.row(0);
  for (Eigen::Index i = 1; i < rows; ++i) col_max = col_max.cwiseMax(logits.row(i));
  Matrix col_soft(rows, rows);
  Eigen::RowVectorXd col_sum = Eigen::RowVectorXd::Zero(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    col_soft.row(i) = (logits.row(i) - col_max).array().exp();
    col_sum += col_soft.row(i);
  }

  // anchors in the first view normalize over rows; reuse the logits storage
  double lse_total = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    auto row = logits.row(i);
    const double m = row.maxCoeff();
    row = (row.array() - m).exp();
    const double s = row.sum();
    lse_total += m + std::log(s);
    row /= s;
  }
  lse_total += (col_max.array() + col_sum.array().log()).sum();

  PairLoss out;
  out.value = (lse_total - 2.0 * diag) / (2.0 * n);

  // dL/dlogits = (softmax_rows + softmax_cols - 2 I) / 2N
  const Eigen::RowVectorXd inv_col_sum = col_sum.cwiseInverse();
  for (Eigen::Index i = 0; i < rows; ++i) {
    logits.row(i).array() += col_soft.row(i).array() * inv_col_sum.array();
  }
  logits.diagonal().array() -= 2.0;
  logits /= 2.0 * n * temperature;
  out.grad_first = logits * z_other;
  out.grad_second = logits.transpose() * z;
  return out;
}

namespace {

struct Standardized {
  Matrix values;
  Vector stddev;
  std::vector<bool> floored;
};

constexpr double kVarianceFloor = 1e-8;

Standardized standardize(const Matrix& z) {
  const auto n = static_cast<double>(z.rows());
  Standardized out;
  const Eigen::RowVectorXd mean = z.colwise().mean();
  Matrix centered = z.rowwise() - mean;
  out.stddev.resize(z.cols());
  out.floored.assign(static_cast<std::size_t>(z.cols()), false);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    double var = centered.col(j).squaredNorm() / n;
    if (var < kVarianceFloor) {
      var = kVarianceFloor;
      out.floored[static_cast<std::size_t>(j)] = true;
    }
    out.stddev(j) = std::sqrt(var);
  }
  out.values = centered.array().rowwise() / out.stddev.transpose().array();
  return out;
}

Matrix standardize_backward(const Standardized& s, const Matrix& grad) {
  const auto n = static_cast<double>(grad.rows());
  Matrix out(grad.rows(), grad.cols());
  for (Eigen::Index j = 0; j < grad.cols(); ++j) {
    const double mean_grad = grad.col(j).sum() / n;
    Vector col = grad.col(j).array() - mean_grad;
    if (!s.floored[static_cast<std::size_t>(j)]) {
      const double mean_dot = grad.col(j).dot(s.values.col(j)) / n;
      col -= mean_dot * s.values.col(j);
    }
    out.col(j) = col / s.stddev(j);
  }
  return out;
}

}  // namespace

PairLoss decorrelation_loss(const Matrix& z, const Matrix& z_other, double lambda) {
  check_pair(z, z_other);
  require(z.rows() >= 2, "decorrelation loss needs N >= 2");
  require(lambda >= 0.0, "lambda must be >= 0");
  const auto n = static_cast<double>(z.rows());
  const Standardized a = standardize(z);
  const Standardized b = standardize(z_other);
  const Matrix c = a.values.transpose() * b.values / n;

  PairLoss out;
  Matrix grad_c = 2.0 * lambda * c;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double gap = 1.0 - c(i, i);
    out.value += gap * gap;
    grad_c(i, i) = -2.0 * gap;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (i != j) out.value += lambda * c(i, j) * c(i, j);
    }
  }
  for (bool f : a.floored) out.floored_dims += f;
  for (bool f : b.floored) out.floored_dims += f;
  if (out.floored_dims > 0) {
    spdlog::debug("decorrelation loss: {} zero-variance dimensions floored", out.floored_dims);
  }
  out.grad_first = standardize_backward(a, b.values * grad_c.transpose() / n);
  out.grad_second = standardize_backward(b, a.values * grad_c / n);
  return out;
}

}  // namespace imgcl
