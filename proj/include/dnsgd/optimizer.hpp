#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "dnsgd/curvature.hpp"
#include "dnsgd/error.hpp"
#include "dnsgd/linalg.hpp"
#include "dnsgd/network.hpp"

namespace dnsgd {

enum class OptimizerKind { Sgd, DnSgd, SgdDn };

// Which layers an SGD step touches: everything (baseline SGD) or all but the
// last layer (the hybrid iterations, whose last layer is updated by Newton).
enum class LayerSelection { All, FrontOnly };

enum class SolverStatus { Ok, FellBackToGradient };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double learning_rate = 0.01;  // lambda
  double damping = 0.0;         // alpha
  std::size_t batch_size = 1;   // N
  std::uint64_t seed = 0;

  // lambda may be zero (it freezes the SGD-updated layers, which is useful
  // and well defined); alpha must be nonnegative and N positive.
  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw InvalidConfig("optimizer: learning rate must be finite and >= 0");
    if (!(damping >= 0.0) || !std::isfinite(damping))
      throw InvalidConfig("optimizer: damping must be finite and >= 0");
    if (batch_size == 0) throw InvalidConfig("optimizer: batch size must be >= 1");
  }
};

// Diagnostics of one optimizer iteration. h_max and newton_step_norm are
// meaningful only for the hybrid kinds.
struct StepReport {
  double batch_loss_before = 0.0;
  double h_max = 0.0;
  double newton_step_norm = 0.0;
  SolverStatus solver_status = SolverStatus::Ok;
};

// theta <- theta - lambda * grad on the selected layers; unselected layers
// are copied through unchanged.
inline ParameterSet sgd_step(const ParameterSet& params, const LayerGradients& grads,
                             double learning_rate, LayerSelection selection) {
  if (grads.size() != params.weights.size())
    throw DimensionMismatch("sgd_step: gradient layer count mismatch");
  ParameterSet updated = params;
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (grads[l].rows() != params.weights[l].rows() ||
        grads[l].cols() != params.weights[l].cols())
      throw DimensionMismatch("sgd_step: gradient shape mismatch");
    if (selection == LayerSelection::FrontOnly && l == last) continue;
    for (std::size_t i = 0; i < grads[l].entries().size(); ++i)
      updated.weights[l].entries()[i] -= learning_rate * grads[l].entries()[i];
  }
  return updated;
}

// Damped Newton update of the last layer: solve
//   (H + (alpha + H_max) I) p = g,   theta_last <- theta_last - p,
// with H_max the (signed) maximum element of H. No learning rate scales the
// Newton step; its size is controlled entirely by the damping. If the
// Cholesky solve fails -- possible only when alpha = 0 and H is (numerically)
// the null matrix -- the step degrades to plain gradient descent with rate
// fallback_lr and the report says so.
inline std::pair<ParameterSet, StepReport> damped_newton_last_step(
    const ParameterSet& params, const LastLayerCurvature& curv, double alpha,
    double fallback_lr) {
  const std::size_t dim = params.last().entries().size();
  if (curv.gradient.size() != dim || curv.hessian.rows() != dim ||
      curv.hessian.cols() != dim)
    throw DimensionMismatch("damped_newton_last_step: curvature dimension mismatch");

  StepReport report;
  report.h_max = max_element(curv.hessian);

  Matrix system = curv.hessian;
  const double shift = alpha + report.h_max;
  for (std::size_t i = 0; i < dim; ++i) system(i, i) += shift;

  Vector p;
  try {
    p = cholesky_solve(system, curv.gradient);
    report.solver_status = SolverStatus::Ok;
  } catch (const NotPositiveDefinite&) {
    p = curv.gradient;
    for (double& v : p) v *= fallback_lr;
    report.solver_status = SolverStatus::FellBackToGradient;
  }
  report.newton_step_norm = norm2(p);

  ParameterSet updated = params;
  for (std::size_t i = 0; i < dim; ++i) updated.last().entries()[i] -= p[i];
  return {std::move(updated), report};
}

namespace detail {

inline LastLayerCurvature last_layer_curvature(const NetworkConfig& network,
                                               const ParameterSet& params,
                                               const Batch& batch) {
  return network.task == Task::Regression ? mse_last_curvature(network, params, batch)
                                          : cel_last_curvature(network, params, batch);
}

}  // namespace detail

// One DN-SGD iteration: last-layer curvature on the batch, damped Newton
// update of the last layer, then a fresh backward pass (through the updated
// last layer) feeding an SGD update of every front layer.
inline std::pair<ParameterSet, StepReport> dn_sgd_iteration(
    const NetworkConfig& network, const ParameterSet& params, const Batch& batch,
    const OptimizerConfig& config) {
  if (config.kind != OptimizerKind::DnSgd)
    throw InvalidConfig("dn_sgd_iteration: config.kind must be DnSgd");
  if (batch.empty()) throw EmptyBatch("dn_sgd_iteration: empty batch");

  const double loss_before = batch_loss(network, params, batch);
  const LastLayerCurvature curv = detail::last_layer_curvature(network, params, batch);
  auto [updated, report] =
      damped_newton_last_step(params, curv, config.damping, config.learning_rate);
  report.batch_loss_before = loss_before;

  if (network.depth() >= 2) {
    const LayerGradients grads = batch_gradients(network, updated, batch);
    updated = sgd_step(updated, grads, config.learning_rate, LayerSelection::FrontOnly);
  }
  return {std::move(updated), report};
}

// One SGD-DN iteration: front-layer gradients and SGD update first, then
// last-layer curvature recomputed with the updated front layers, then the
// damped Newton update of the last layer.
inline std::pair<ParameterSet, StepReport> sgd_dn_iteration(
    const NetworkConfig& network, const ParameterSet& params, const Batch& batch,
    const OptimizerConfig& config) {
  if (config.kind != OptimizerKind::SgdDn)
    throw InvalidConfig("sgd_dn_iteration: config.kind must be SgdDn");
  if (batch.empty()) throw EmptyBatch("sgd_dn_iteration: empty batch");

  const double loss_before = batch_loss(network, params, batch);
  ParameterSet updated = params;
  if (network.depth() >= 2) {
    const LayerGradients grads = batch_gradients(network, params, batch);
    updated = sgd_step(params, grads, config.learning_rate, LayerSelection::FrontOnly);
  }

  const LastLayerCurvature curv =
      detail::last_layer_curvature(network, updated, batch);
  auto [final_params, report] =
      damped_newton_last_step(updated, curv, config.damping, config.learning_rate);
  report.batch_loss_before = loss_before;
  return {std::move(final_params), report};
}

// One baseline SGD iteration over every layer, reported in the same shape as
// the hybrid iterations (curvature diagnostics stay zero).
inline std::pair<ParameterSet, StepReport> sgd_iteration(const NetworkConfig& network,
                                                         const ParameterSet& params,
                                                         const Batch& batch,
                                                         const OptimizerConfig& config) {
  if (config.kind != OptimizerKind::Sgd)
    throw InvalidConfig("sgd_iteration: config.kind must be Sgd");
  if (batch.empty()) throw EmptyBatch("sgd_iteration: empty batch");

  StepReport report;
  report.batch_loss_before = batch_loss(network, params, batch);
  const LayerGradients grads = batch_gradients(network, params, batch);
  return {sgd_step(params, grads, config.learning_rate, LayerSelection::All), report};
}

}  // namespace dnsgd
