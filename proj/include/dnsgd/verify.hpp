#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dnsgd/curvature.hpp"
#include "dnsgd/linalg.hpp"
#include "dnsgd/network.hpp"

namespace dnsgd {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::size_t instances = 0;
  std::string detail;  // worst observed value vs the bound
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Self-test hook: negates one Hessian so the PSD suite must fail.
  bool inject_psd_fault = false;
};

namespace detail {

inline std::string format_bound(const char* what, double worst, double bound) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, "%s %.3g (bound %.3g)", what, worst, bound);
  return buffer;
}

inline NetworkConfig random_verify_network(std::mt19937_64& rng, Task task,
                                           std::size_t max_width,
                                           std::size_t output_width) {
  std::uniform_int_distribution<std::size_t> width(1, max_width);
  std::uniform_int_distribution<int> hidden(1, 2);
  NetworkConfig config;
  config.task = task;
  config.hidden_activation = rng() % 2 ? Activation::Sigmoid : Activation::Relu;
  config.layer_sizes.push_back(width(rng));
  for (int h = hidden(rng); h > 0; --h) config.layer_sizes.push_back(width(rng));
  config.layer_sizes.push_back(output_width);
  config.validate();
  return config;
}

inline ParameterSet random_verify_params(const NetworkConfig& config,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  ParameterSet params;
  for (std::size_t l = 1; l < config.layer_sizes.size(); ++l) {
    Matrix w(config.layer_sizes[l], config.layer_sizes[l - 1] + 1);
    for (double& e : w.entries()) e = u(rng);
    params.weights.push_back(std::move(w));
  }
  return params;
}

inline Batch random_verify_batch(const NetworkConfig& config, std::mt19937_64& rng,
                                 std::size_t max_size) {
  std::uniform_int_distribution<std::size_t> size(1, max_size);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Batch batch;
  for (std::size_t i = size(rng); i > 0; --i) {
    Vector x(config.input_size());
    for (double& v : x) v = u(rng);
    Vector y;
    if (config.task == Task::Regression) {
      y = {u(rng)};
    } else {
      y.assign(config.output_size(), 0.0);
      y[rng() % config.output_size()] = 1.0;
    }
    batch.push_back({std::move(x), std::move(y)});
  }
  return batch;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Runs the randomized property suites behind the paper's guarantees and the
// finite-difference oracles; one result row per suite. Deterministic for a
// fixed seed.
inline std::vector<PropertyResult> run_property_suites(const VerifyOptions& options) {
  std::vector<PropertyResult> results;

  // PSD of the batch-averaged MSE last-layer Hessian.
  {
    std::mt19937_64 rng(options.seed * 7919 + 1);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const auto config = detail::random_verify_network(rng, Task::Regression, 10, 1);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 16);
      Matrix h = mse_last_curvature(config, params, batch).hessian;
      if (options.inject_psd_fault && rep == 0)
        for (double& e : h.entries()) e = -e;
      worst = std::min(worst, min_eigenvalue(h));
    }
    results.push_back({"mse-last-hessian-psd", worst >= -1e-9, 50,
                       detail::format_bound("min eigenvalue", worst, -1e-9)});
  }

  // PSD of the batch-averaged cross-entropy last-layer Hessian.
  {
    std::mt19937_64 rng(options.seed * 7919 + 2);
    const std::size_t classes[] = {2, 3, 5};
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const auto config = detail::random_verify_network(rng, Task::Classification, 10,
                                                        classes[rep % 3]);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 16);
      worst = std::min(worst,
                       min_eigenvalue(cel_last_curvature(config, params, batch).hessian));
    }
    results.push_back({"cel-last-hessian-psd", worst >= -1e-9, 50,
                       detail::format_bound("min eigenvalue", worst, -1e-9)});
  }

  // PSD of the single-sample penultimate-relu Hessian kron(B, C), and the
  // rank-one structure B = 2uu^T.
  {
    std::mt19937_64 rng(options.seed * 7919 + 3);
    double worst_eig = 0.0;
    double worst_entry = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      auto config = detail::random_verify_network(rng, Task::Regression, 6, 1);
      config.hidden_activation = Activation::Relu;
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 1);
      const CurvatureFactors f =
          penultimate_relu_factors(config, params, batch[0].input, batch[0].target);
      worst_eig = std::min(worst_eig, min_eigenvalue(kron(f.left, f.right)));
      for (std::size_t j = 0; j < f.left.rows(); ++j)
        for (std::size_t k = 0; k < f.left.cols(); ++k)
          worst_entry = std::max(
              worst_entry, std::abs(f.left(j, k) - 2.0 * f.u[j] * f.u[k]));
    }
    results.push_back({"penultimate-relu-kron-psd", worst_eig >= -1e-9, 50,
                       detail::format_bound("min eigenvalue", worst_eig, -1e-9)});
    results.push_back({"penultimate-b-rank-one", worst_entry <= 1e-12, 50,
                       detail::format_bound("worst |B - 2uu^T|", worst_entry, 1e-12)});
  }

  // Per-sample cross-entropy Hessian equals kron(E, F).
  {
    std::mt19937_64 rng(options.seed * 7919 + 4);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const auto config = detail::random_verify_network(rng, Task::Classification, 5,
                                                        2 + rep % 3);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 1);
      const Matrix h = cel_last_curvature(config, params, batch).hessian;
      const CurvatureFactors f = cel_sample_factors(config, params, batch[0].input);
      const Matrix kf = kron(f.left, f.right);
      for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j)
          worst = std::max(worst, std::abs(h(i, j) - kf(i, j)));
    }
    results.push_back({"cel-kron-factorization", worst <= 1e-10, 20,
                       detail::format_bound("worst entry difference", worst, 1e-10)});
  }

  // Quadratic-form identity z^T E z = 1/2 sum e_j e_k (z_j - z_k)^2.
  {
    std::mt19937_64 rng(options.seed * 7919 + 5);
    std::uniform_real_distribution<double> zdist(-3.0, 3.0);
    double worst_rel = 0.0;
    double worst_value = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto config = detail::random_verify_network(rng, Task::Classification, 5,
                                                        2 + rep % 5);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 1);
      const CurvatureFactors f = cel_sample_factors(config, params, batch[0].input);
      Vector z(f.u.size());
      for (double& v : z) v = zdist(rng);
      const auto [lhs, rhs] = quadratic_form_identity_check(f.left, f.u, z);
      worst_rel = std::max(worst_rel, detail::relative_error(lhs, rhs));
      worst_value = std::min({worst_value, lhs, rhs});
    }
    results.push_back({"softmax-quadratic-identity",
                       worst_rel <= 1e-8 && worst_value >= -1e-10, 100,
                       detail::format_bound("worst relative gap", worst_rel, 1e-8)});
  }

  // Backpropagated gradients vs central finite differences, every layer.
  {
    std::mt19937_64 rng(options.seed * 7919 + 6);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Task task = rep % 2 ? Task::Regression : Task::Classification;
      const auto config = detail::random_verify_network(
          rng, task, 5, task == Task::Regression ? 1 : 2 + rep % 3);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 1);
      const auto& s = batch[0];
      const LayerGradients grads =
          backward(config, params, forward(config, params, s.input), s.target);
      const double h = 1e-6;
      for (std::size_t l = 0; l < params.weights.size(); ++l)
        for (std::size_t i = 0; i < params.weights[l].entries().size(); ++i) {
          ParameterSet up = params;
          ParameterSet down = params;
          up.weights[l].entries()[i] += h;
          down.weights[l].entries()[i] -= h;
          const double fd = (loss(forward(config, up, s.input), s.target, task) -
                             loss(forward(config, down, s.input), s.target, task)) /
                            (2.0 * h);
          worst = std::max(worst, detail::relative_error(fd, grads[l].entries()[i]));
        }
    }
    results.push_back({"backprop-gradient-fd", worst <= 1e-5, 20,
                       detail::format_bound("worst relative error", worst, 1e-5)});
  }

  // Last-layer Hessians vs the finite-difference Jacobian of the gradient.
  {
    std::mt19937_64 rng(options.seed * 7919 + 7);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Task task = rep % 2 ? Task::Regression : Task::Classification;
      const auto config = detail::random_verify_network(
          rng, task, 4, task == Task::Regression ? 1 : 2 + rep % 2);
      const auto params = detail::random_verify_params(config, rng);
      const auto batch = detail::random_verify_batch(config, rng, 3);
      const auto curvature = [&](const ParameterSet& p) {
        return task == Task::Regression ? mse_last_curvature(config, p, batch)
                                        : cel_last_curvature(config, p, batch);
      };
      const Matrix hess = curvature(params).hessian;
      const double h = 1e-5;
      for (std::size_t col = 0; col < hess.cols(); ++col) {
        ParameterSet up = params;
        ParameterSet down = params;
        up.last().entries()[col] += h;
        down.last().entries()[col] -= h;
        const Vector gu = curvature(up).gradient;
        const Vector gd = curvature(down).gradient;
        for (std::size_t row = 0; row < hess.rows(); ++row)
          worst = std::max(
              worst, std::abs(hess(row, col) - (gu[row] - gd[row]) / (2.0 * h)));
      }
    }
    results.push_back({"last-hessian-fd-jacobian", worst <= 1e-4, 20,
                       detail::format_bound("worst entry error", worst, 1e-4)});
  }

  return results;
}

}  // namespace dnsgd
