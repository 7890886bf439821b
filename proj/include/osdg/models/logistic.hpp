#pragma once

// L2-regularized, example-weighted binary logistic loss over any Eigen design
// matrix (dense or sparse). Shared by the trainer and the gradient checks.

#include <Eigen/Core>

#include <cmath>

namespace osdg {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Weighted mean log-loss plus (lambda / 2) * ||w||^2. `labels` holds 0/1,
// `example_weights` is non-negative with a positive sum.
template <typename MatrixType>
typename MatrixType::Scalar regularized_log_loss(
    const MatrixType& X, const VectorX<typename MatrixType::Scalar>& labels,
    const VectorX<typename MatrixType::Scalar>& example_weights,
    const VectorX<typename MatrixType::Scalar>& w, typename MatrixType::Scalar bias,
    typename MatrixType::Scalar lambda) {
  using Scalar = typename MatrixType::Scalar;
  const VectorX<Scalar> margins = (X * w).array() + bias;
  Scalar total = 0;
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    total += example_weights[i] * (softplus(margins[i]) - labels[i] * margins[i]);
  return total / example_weights.sum() + Scalar(0.5) * lambda * w.squaredNorm();
}

// Analytic gradient of regularized_log_loss with respect to (w, bias).
template <typename MatrixType>
void regularized_log_loss_gradient(const MatrixType& X,
                                   const VectorX<typename MatrixType::Scalar>& labels,
                                   const VectorX<typename MatrixType::Scalar>& example_weights,
                                   const VectorX<typename MatrixType::Scalar>& w,
                                   typename MatrixType::Scalar bias,
                                   typename MatrixType::Scalar lambda,
                                   VectorX<typename MatrixType::Scalar>& grad_w,
                                   typename MatrixType::Scalar& grad_bias) {
  using Scalar = typename MatrixType::Scalar;
  const VectorX<Scalar> margins = (X * w).array() + bias;
  VectorX<Scalar> residual(margins.size());
  const Scalar norm = example_weights.sum();
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    residual[i] = example_weights[i] * (sigmoid(margins[i]) - labels[i]) / norm;
  grad_w = X.transpose() * residual + lambda * w;
  grad_bias = residual.sum();
}

}  // namespace osdg
