#pragma once

// Shared test utilities: random instance generators and finite-difference
// oracles. Everything here recomputes through the public forward/loss
// surface only, so gradient and Hessian checks stay independent of the
// backprop and curvature code paths they verify.

#include <cstdint>
#include <random>
#include <vector>

#include "dnsgd/network.hpp"

namespace testutil {

inline dnsgd::Vector random_vector(std::mt19937_64& rng, std::size_t n,
                                   double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  dnsgd::Vector v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

inline dnsgd::NetworkConfig random_config(std::mt19937_64& rng, dnsgd::Task task,
                                          dnsgd::Activation act,
                                          std::size_t max_width = 10) {
  std::uniform_int_distribution<std::size_t> width(1, max_width);
  std::uniform_int_distribution<std::size_t> hidden_count(1, 2);
  dnsgd::NetworkConfig config;
  config.task = task;
  config.hidden_activation = act;
  config.layer_sizes.push_back(width(rng));
  const std::size_t hidden = hidden_count(rng);
  for (std::size_t l = 0; l < hidden; ++l) config.layer_sizes.push_back(width(rng));
  if (task == dnsgd::Task::Regression) {
    config.layer_sizes.push_back(1);
  } else {
    std::uniform_int_distribution<std::size_t> classes(2, max_width < 2 ? 2 : max_width);
    config.layer_sizes.push_back(classes(rng));
  }
  return config;
}

inline dnsgd::ParameterSet random_params(const dnsgd::NetworkConfig& config,
                                         std::mt19937_64& rng, double scale = 1.0) {
  dnsgd::ParameterSet params;
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t l = 1; l < config.layer_sizes.size(); ++l) {
    dnsgd::Matrix w(config.layer_sizes[l], config.layer_sizes[l - 1] + 1);
    for (auto& e : w.entries()) e = u(rng);
    params.weights.push_back(std::move(w));
  }
  return params;
}

inline dnsgd::Vector random_target(const dnsgd::NetworkConfig& config,
                                   std::mt19937_64& rng) {
  if (config.task == dnsgd::Task::Regression) return random_vector(rng, 1, 2.0);
  std::uniform_int_distribution<std::size_t> cls(0, config.output_size() - 1);
  dnsgd::Vector y(config.output_size(), 0.0);
  y[cls(rng)] = 1.0;
  return y;
}

inline dnsgd::Batch random_batch(const dnsgd::NetworkConfig& config,
                                 std::mt19937_64& rng, std::size_t size) {
  dnsgd::Batch batch;
  for (std::size_t i = 0; i < size; ++i)
    batch.push_back({random_vector(rng, config.input_size(), 2.0),
                     random_target(config, rng)});
  return batch;
}

// Central finite difference of the single-sample loss with respect to one
// weight entry.
inline double fd_weight_derivative(const dnsgd::NetworkConfig& config,
                                   dnsgd::ParameterSet params, const dnsgd::Sample& s,
                                   std::size_t layer, std::size_t i, std::size_t j,
                                   double h = 1e-6) {
  const double w0 = params.weights[layer](i, j);
  params.weights[layer](i, j) = w0 + h;
  const double up =
      dnsgd::loss(dnsgd::forward(config, params, s.input), s.target, config.task);
  params.weights[layer](i, j) = w0 - h;
  const double down =
      dnsgd::loss(dnsgd::forward(config, params, s.input), s.target, config.task);
  return (up - down) / (2.0 * h);
}

// |a - b| scaled by max(1, |a|, |b|), the usual gradient-check metric.
inline double rel_error(double a, double b) {
  const double denom = std::max(1.0, std::max(std::abs(a), std::abs(b)));
  return std::abs(a - b) / denom;
}

}  // namespace testutil
