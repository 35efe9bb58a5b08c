#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "dnsgd/data.hpp"
#include "dnsgd/error.hpp"
#include "dnsgd/network.hpp"

namespace dnsgd {

// Regression benchmark: x ~ N(0, I), y = a.x + 0.5 sin(b.x) + 0.1 eps with
// fixed coefficient vectors a, b drawn once from the seed. The sine term
// keeps the problem gently nonlinear so hidden layers have something to do.
inline Dataset make_sine_regression(std::size_t count, std::size_t dim,
                                    std::uint64_t seed) {
  if (count == 0 || dim == 0)
    throw InvalidConfig("make_sine_regression: count and dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  Vector a(dim), b(dim);
  for (double& v : a) v = coeff(rng);
  for (double& v : b) v = coeff(rng);

  Dataset data;
  data.task = Task::Regression;
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(dim);
    double ax = 0.0, bx = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      x[c] = gauss(rng);
      ax += a[c] * x[c];
      bx += b[c] * x[c];
    }
    data.features.push_back(std::move(x));
    data.regression_targets.push_back(ax + 0.5 * std::sin(bx) + 0.1 * gauss(rng));
  }
  return data;
}

// Classification benchmark: two unit-covariance Gaussian blobs centered at
// +/- 1.2/sqrt(dim) * ones, so the centroid distance stays constant as the
// dimension grows. Labels are drawn fair-coin per sample.
inline Dataset make_gaussian_blobs(std::size_t count, std::size_t dim,
                                   std::uint64_t seed) {
  if (count == 0 || dim == 0)
    throw InvalidConfig("make_gaussian_blobs: count and dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution label(0.5);
  const double offset = 1.2 / std::sqrt(static_cast<double>(dim));

  Dataset data;
  data.task = Task::Classification;
  data.class_count = 2;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cls = label(rng) ? 1 : 0;
    const double center = cls == 0 ? offset : -offset;
    Vector x(dim);
    for (double& v : x) v = center + gauss(rng);
    data.features.push_back(std::move(x));
    data.class_targets.push_back(cls);
  }
  return data;
}

// Writes a dataset as CSV with columns f0..f{n-1},target, numbers rendered
// round-trip exact (%.17g). Classification targets are written as class
// indices.
inline void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw Error("write_dataset_csv: cannot open '" + path + "'");

  const std::size_t width = data.feature_width();
  for (std::size_t c = 0; c < width; ++c) file << 'f' << c << ',';
  file << "target\n";

  char buffer[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      std::snprintf(buffer, sizeof buffer, "%.17g", data.features[r][c]);
      file << buffer << ',';
    }
    if (data.task == Task::Regression) {
      std::snprintf(buffer, sizeof buffer, "%.17g", data.regression_targets[r]);
      file << buffer << '\n';
    } else {
      file << data.class_targets[r] << '\n';
    }
  }
  if (!file) throw Error("write_dataset_csv: write failed for '" + path + "'");
}

}  // namespace dnsgd
