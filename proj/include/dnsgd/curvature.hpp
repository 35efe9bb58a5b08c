#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "dnsgd/error.hpp"
#include "dnsgd/linalg.hpp"
#include "dnsgd/network.hpp"

namespace dnsgd {

// Batch-averaged gradient and dense Hessian of the loss with respect to the
// last layer's parameters, vectorized as the concatenated rows of W^(L)
// (row-major flat order of the weight matrix).
struct LastLayerCurvature {
  Vector gradient;
  Matrix hessian;
};

// Kronecker factor pair of a single-sample Hessian: (B, C) for the
// ReLU-penultimate regression case, (E, F) for the softmax last layer.
// `partition` carries the softmax normalizer D (classification only) and
// `u` the per-unit products W_j^(L) * relu'(z_j) (regression only).
struct CurvatureFactors {
  Matrix left;
  Matrix right;
  double partition = 0.0;
  Vector u;
};

// Mean over the batch of the exact last-layer MSE curvature:
// gradient 2(Wx - y)x, Hessian 2xx^T per sample, with x the augmented
// penultimate activation.
inline LastLayerCurvature mse_last_curvature(const NetworkConfig& config,
                                             const ParameterSet& params,
                                             const Batch& batch) {
  if (config.task != Task::Regression)
    throw InvalidConfig("mse_last_curvature: regression networks only");
  if (batch.empty()) throw EmptyBatch("mse_last_curvature: empty batch");

  const std::size_t dim = config.last_layer_param_count();
  LastLayerCurvature curv{Vector(dim, 0.0), Matrix(dim, dim)};
  for (const Sample& s : batch) {
    if (s.target.size() != 1)
      throw DimensionMismatch("mse_last_curvature: expected a scalar target");
    ForwardTrace trace = forward(config, params, s.input);
    const Vector& x = trace.penultimate();
    const double residual = trace.output()[0] - s.target[0];
    for (std::size_t i = 0; i < dim; ++i) {
      curv.gradient[i] += 2.0 * residual * x[i];
      for (std::size_t j = 0; j < dim; ++j) curv.hessian(i, j) += 2.0 * x[i] * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : curv.gradient) g *= inv;
  for (double& h : curv.hessian.entries()) h *= inv;
  return curv;
}

// Mean over the batch of the exact last-layer cross-entropy curvature.
// Per sample the gradient block for class j is (p_j - Y_j) x and the
// Hessian block (j,k) is (p_j 1[j=k] - p_j p_k) xx^T, the softmax form of
// the E (x) F factorization.
inline LastLayerCurvature cel_last_curvature(const NetworkConfig& config,
                                             const ParameterSet& params,
                                             const Batch& batch) {
  if (config.task != Task::Classification)
    throw InvalidConfig("cel_last_curvature: classification networks only");
  if (batch.empty()) throw EmptyBatch("cel_last_curvature: empty batch");

  const std::size_t classes = config.output_size();
  const std::size_t width = config.layer_sizes[config.layer_sizes.size() - 2] + 1;
  const std::size_t dim = classes * width;
  LastLayerCurvature curv{Vector(dim, 0.0), Matrix(dim, dim)};

  for (const Sample& s : batch) {
    if (s.target.size() != classes)
      throw DimensionMismatch("cel_last_curvature: target length mismatch");
    ForwardTrace trace = forward(config, params, s.input);
    const Vector& p = trace.output();
    for (double v : p)
      if (!std::isfinite(v))
        throw NonFiniteLoss("cel_last_curvature: non-finite softmax output");
    const Vector& x = trace.penultimate();

    for (std::size_t j = 0; j < classes; ++j) {
      const double gj = p[j] - s.target[j];
      for (std::size_t a = 0; a < width; ++a) curv.gradient[j * width + a] += gj * x[a];
      for (std::size_t k = 0; k < classes; ++k) {
        const double coeff = j == k ? p[j] * (1.0 - p[j]) : -p[j] * p[k];
        for (std::size_t a = 0; a < width; ++a)
          for (std::size_t b = 0; b < width; ++b)
            curv.hessian(j * width + a, k * width + b) += coeff * x[a] * x[b];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : curv.gradient) g *= inv;
  for (double& h : curv.hessian.entries()) h *= inv;
  return curv;
}

// Single-sample softmax Hessian factors E and F plus the partition sum D,
// built from shift-invariant exponentials (logits shifted by their max;
// E (x) F is unchanged because E and 1/D^2 rescale inversely).
inline CurvatureFactors cel_sample_factors(const NetworkConfig& config,
                                           const ParameterSet& params,
                                           const Vector& input) {
  if (config.task != Task::Classification)
    throw InvalidConfig("cel_sample_factors: classification networks only");

  ForwardTrace trace = forward(config, params, input);
  const Vector& x = trace.penultimate();
  Vector logits = matvec(params.last(), x);
  double shift = logits[0];
  for (double z : logits) shift = std::max(shift, z);

  const std::size_t classes = logits.size();
  Vector exps(classes);
  double d = 0.0;
  for (std::size_t j = 0; j < classes; ++j) {
    exps[j] = std::exp(logits[j] - shift);
    d += exps[j];
  }
  if (!std::isfinite(d) || d <= 0.0)
    throw NonFiniteLoss("cel_sample_factors: degenerate partition sum");

  CurvatureFactors factors;
  factors.left = Matrix(classes, classes);
  for (std::size_t j = 0; j < classes; ++j)
    for (std::size_t k = 0; k < classes; ++k)
      factors.left(j, k) = j == k ? exps[j] * (d - exps[j]) : -exps[j] * exps[k];
  factors.right = outer(x, x);
  for (double& e : factors.right.entries()) e /= d * d;
  factors.partition = d;
  factors.u = std::move(exps);
  return factors;
}

// Kronecker factors of the single-sample Hessian with respect to the
// penultimate layer's parameters when that layer is ReLU:
// B_jk = 2 W_j^(L) W_k^(L) relu'(z_j) relu'(z_k) entrywise, C = xx^T over
// the augmented x^(L-2). The proof's compact form B = 2uu^T is exposed via
// the returned u for cross-checks. relu'(0) = 0.
inline CurvatureFactors penultimate_relu_factors(const NetworkConfig& config,
                                                 const ParameterSet& params,
                                                 const Vector& input,
                                                 const Vector& target) {
  if (config.task != Task::Regression)
    throw InvalidConfig("penultimate_relu_factors: regression networks only");
  if (config.hidden_activation != Activation::Relu)
    throw WrongActivation("penultimate_relu_factors: penultimate layer is not relu");
  if (config.depth() < 2)
    throw DimensionMismatch("penultimate_relu_factors: network has no hidden layer");
  if (target.size() != 1)
    throw DimensionMismatch("penultimate_relu_factors: expected a scalar target");

  const std::size_t depth = config.depth();
  ForwardTrace trace = forward(config, params, input);
  const Vector& x = trace.activations[depth - 2];
  Vector z = matvec(params.weights[depth - 2], x);

  const std::size_t units = config.layer_sizes[depth - 1];
  const Matrix& wlast = params.last();  // 1 x (units + 1); column 0 is the bias
  Vector dact(units), u(units);
  for (std::size_t j = 0; j < units; ++j) {
    dact[j] = z[j] > 0.0 ? 1.0 : 0.0;
    u[j] = wlast(0, j + 1) * dact[j];
  }

  CurvatureFactors factors;
  factors.left = Matrix(units, units);
  for (std::size_t j = 0; j < units; ++j)
    for (std::size_t k = 0; k < units; ++k)
      factors.left(j, k) = 2.0 * wlast(0, j + 1) * wlast(0, k + 1) * dact[j] * dact[k];
  factors.right = outer(x, x);
  factors.u = std::move(u);
  return factors;
}

// Evaluates both sides of the quadratic-form identity
// z^T E z = 1/2 sum_jk e_j e_k (z_j - z_k)^2 by direct double loops.
inline std::pair<double, double> quadratic_form_identity_check(const Matrix& e,
                                                               const Vector& weights_exp,
                                                               const Vector& z) {
  if (e.rows() != e.cols() || e.rows() != weights_exp.size() ||
      z.size() != weights_exp.size())
    throw DimensionMismatch("quadratic_form_identity_check: size mismatch");

  const std::size_t n = z.size();
  double lhs = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) lhs += z[j] * e(j, k) * z[k];

  double rhs = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double diff = z[j] - z[k];
      rhs += weights_exp[j] * weights_exp[k] * diff * diff;
    }
  rhs *= 0.5;
  return {lhs, rhs};
}

}  // namespace dnsgd
