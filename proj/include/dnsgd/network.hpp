#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dnsgd/error.hpp"
#include "dnsgd/linalg.hpp"

namespace dnsgd {

enum class Task { Regression, Classification };
enum class Activation { Sigmoid, Relu };

// Fully connected feed-forward network with the bias folded into the
// weights: every activation vector below the output carries a leading
// component fixed at 1, and layer l owns an n_l x (n_{l-1}+1) weight
// matrix. Hidden layers use the configured activation; the output layer is
// the identity for regression and softmax for classification.
struct NetworkConfig {
  std::vector<std::size_t> layer_sizes;  // n_0 .. n_L
  Task task = Task::Regression;
  Activation hidden_activation = Activation::Sigmoid;

  std::size_t depth() const { return layer_sizes.size() - 1; }  // L
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t last_layer_param_count() const {
    return layer_sizes.back() * (layer_sizes[layer_sizes.size() - 2] + 1);
  }

  void validate() const {
    if (layer_sizes.size() < 2)
      throw InvalidConfig("network: need at least an input and an output layer");
    for (std::size_t n : layer_sizes)
      if (n == 0) throw InvalidConfig("network: zero-width layer");
    if (task == Task::Regression && layer_sizes.back() != 1)
      throw InvalidConfig("network: regression requires a single output node");
    if (task == Task::Classification && layer_sizes.back() < 2)
      throw InvalidConfig("network: classification requires at least two classes");
  }
};

// weights[l] is W^(l+1): the matrix between layer l and layer l+1,
// shape n_{l+1} x (n_l + 1); column 0 is the folded bias.
struct ParameterSet {
  std::vector<Matrix> weights;

  const Matrix& last() const { return weights.back(); }
  Matrix& last() { return weights.back(); }
};

// One labeled sample: the raw (un-augmented) input and the target vector,
// a length-1 vector for regression or a one-hot vector for classification.
struct Sample {
  Vector input;
  Vector target;
};

using Batch = std::vector<Sample>;

// x^(0) .. x^(L). All but the last carry the leading 1; x^(L) is the raw
// output for regression and the softmax probabilities for classification.
struct ForwardTrace {
  std::vector<Vector> activations;

  const Vector& output() const { return activations.back(); }
  const Vector& penultimate() const { return activations[activations.size() - 2]; }
};

using LayerGradients = std::vector<Matrix>;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Shifted by the max logit so large values cannot overflow.
inline Vector softmax(const Vector& logits) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  Vector p(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - mx);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Uniform on [-r, r] with r = 1/sqrt(fan_in) so pre-activations start O(1)
// and sigmoids do not saturate at step 0.
inline ParameterSet init_params(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ParameterSet params;
  for (std::size_t l = 1; l < config.layer_sizes.size(); ++l) {
    const std::size_t fan_in = config.layer_sizes[l - 1] + 1;
    const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-r, r);
    Matrix w(config.layer_sizes[l], fan_in);
    for (auto& e : w.entries()) e = u(rng);
    params.weights.push_back(std::move(w));
  }
  return params;
}

inline ForwardTrace forward(const NetworkConfig& config, const ParameterSet& params,
                            const Vector& input) {
  if (input.size() != config.input_size())
    throw DimensionMismatch("forward: input width " + std::to_string(input.size()) +
                            ", expected " + std::to_string(config.input_size()));

  ForwardTrace trace;
  Vector x(input.size() + 1);
  x[0] = 1.0;
  for (std::size_t i = 0; i < input.size(); ++i) x[i + 1] = input[i];
  trace.activations.push_back(x);

  const std::size_t depth = config.depth();
  for (std::size_t l = 1; l <= depth; ++l) {
    Vector z = matvec(params.weights[l - 1], trace.activations.back());
    if (l < depth) {
      Vector a(z.size() + 1);
      a[0] = 1.0;
      for (std::size_t j = 0; j < z.size(); ++j)
        a[j + 1] = config.hidden_activation == Activation::Sigmoid
                       ? sigmoid(z[j])
                       : std::max(0.0, z[j]);
      trace.activations.push_back(std::move(a));
    } else {
      trace.activations.push_back(config.task == Task::Classification ? softmax(z)
                                                                      : std::move(z));
    }
  }
  return trace;
}

// Single-sample loss: the bare squared error for regression (no 1/2, the
// curvature formulas carry the factor 2) and -sum_j Y_j ln p_j for
// classification. Batch aggregation divides by the batch size elsewhere.
inline double loss(const ForwardTrace& trace, const Vector& target, Task task) {
  const Vector& out = trace.output();
  if (task == Task::Regression) {
    if (target.size() != 1 || out.size() != 1)
      throw DimensionMismatch("loss: regression expects scalar output and target");
    const double r = out[0] - target[0];
    const double value = r * r;
    if (!std::isfinite(value)) throw NonFiniteLoss("loss: non-finite squared error");
    return value;
  }
  if (target.size() != out.size())
    throw DimensionMismatch("loss: target length does not match class count");
  double value = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (target[j] == 0.0) continue;
    if (out[j] <= 1e-300)
      throw NonFiniteLoss("loss: log argument underflow for class " + std::to_string(j));
    value -= target[j] * std::log(out[j]);
  }
  if (!std::isfinite(value)) throw NonFiniteLoss("loss: non-finite cross entropy");
  return value;
}

// Backpropagation of the single-sample loss. The last layer's gradient is
// the exact residual (regression) or softmax-minus-target (classification)
// outer product with the penultimate activation; hidden layers chain the
// usual delta recursion through the non-bias weight columns.
inline LayerGradients backward(const NetworkConfig& config, const ParameterSet& params,
                               const ForwardTrace& trace, const Vector& target) {
  const std::size_t depth = config.depth();
  if (trace.activations.size() != depth + 1)
    throw DimensionMismatch("backward: trace does not match network depth");

  LayerGradients grads(depth);

  // delta = dL/dz at the output layer.
  const Vector& out = trace.output();
  Vector delta;
  if (config.task == Task::Regression) {
    if (target.size() != 1)
      throw DimensionMismatch("backward: regression expects a scalar target");
    delta = {2.0 * (out[0] - target[0])};
  } else {
    if (target.size() != out.size())
      throw DimensionMismatch("backward: target length does not match class count");
    delta.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) delta[j] = out[j] - target[j];
  }

  for (std::size_t l = depth; l >= 1; --l) {
    const Vector& below = trace.activations[l - 1];
    grads[l - 1] = outer(delta, below);
    if (l == 1) break;

    // Push delta through W^(l) minus its bias column, then through the
    // hidden activation's derivative.
    const Matrix& w = params.weights[l - 1];
    const Vector& act = trace.activations[l - 1];  // augmented, act[j+1] = a_j
    Vector next(w.cols() - 1, 0.0);
    for (std::size_t j = 0; j + 1 < w.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, j + 1) * delta[i];
      const double a = act[j + 1];
      const double dact = config.hidden_activation == Activation::Sigmoid
                              ? a * (1.0 - a)
                              : (a > 0.0 ? 1.0 : 0.0);  // relu'(0) = 0
      next[j] = s * dact;
    }
    delta = std::move(next);
  }
  return grads;
}

// Mean loss over a batch (the 1/m of the batch objective).
inline double batch_loss(const NetworkConfig& config, const ParameterSet& params,
                         const Batch& batch) {
  if (batch.empty()) throw EmptyBatch("batch_loss: empty batch");
  double total = 0.0;
  for (const Sample& s : batch)
    total += loss(forward(config, params, s.input), s.target, config.task);
  return total / static_cast<double>(batch.size());
}

// Mean per-layer gradients over a batch, accumulated in batch order.
inline LayerGradients batch_gradients(const NetworkConfig& config,
                                      const ParameterSet& params, const Batch& batch) {
  if (batch.empty()) throw EmptyBatch("batch_gradients: empty batch");
  LayerGradients total;
  for (const Sample& s : batch) {
    ForwardTrace trace = forward(config, params, s.input);
    LayerGradients g = backward(config, params, trace, s.target);
    if (total.empty()) {
      total = std::move(g);
    } else {
      for (std::size_t l = 0; l < total.size(); ++l)
        for (std::size_t i = 0; i < total[l].entries().size(); ++i)
          total[l].entries()[i] += g[l].entries()[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (Matrix& m : total)
    for (double& e : m.entries()) e *= inv;
  return total;
}

}  // namespace dnsgd
