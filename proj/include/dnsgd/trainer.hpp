#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "dnsgd/data.hpp"
#include "dnsgd/error.hpp"
#include "dnsgd/metrics.hpp"
#include "dnsgd/network.hpp"
#include "dnsgd/optimizer.hpp"

namespace dnsgd {

// How often the full-train/test losses are evaluated: at every epoch
// boundary (the default used everywhere in the CLI) or every k iterations.
struct EvalCadence {
  enum class Kind { Epoch, Iterations };
  Kind kind = Kind::Epoch;
  std::size_t every = 1;  // k, when kind == Iterations
};

struct RunConfig {
  NetworkConfig network;
  OptimizerConfig optimizer;
  std::size_t epochs = 1;
  EvalCadence eval;

  void validate() const {
    network.validate();
    optimizer.validate();
    if (epochs < 1) throw InvalidConfig("trainer: epochs must be >= 1");
    if (eval.kind == EvalCadence::Kind::Iterations && eval.every == 0)
      throw InvalidConfig("trainer: evaluation interval must be >= 1");
  }
};

struct EvalResult {
  double mean_loss = 0.0;
  std::optional<double> accuracy;  // classification only
};

// Mean loss over the dataset; classification additionally reports argmax
// accuracy (ties broken toward the smallest class index).
inline EvalResult evaluate(const NetworkConfig& network, const ParameterSet& params,
                           const Dataset& data) {
  if (data.size() == 0) throw EmptyBatch("evaluate: empty dataset");
  if (data.feature_width() != network.input_size())
    throw DimensionMismatch("evaluate: feature width does not match the network");

  EvalResult result;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const ForwardTrace trace = forward(network, params, data.features[r]);
    result.mean_loss += loss(trace, data.target_vector(r), network.task);
    if (network.task == Task::Classification) {
      const Vector& out = trace.output();
      std::size_t argmax = 0;
      for (std::size_t j = 1; j < out.size(); ++j)
        if (out[j] > out[argmax]) argmax = j;
      if (argmax == data.class_targets[r]) ++correct;
    }
  }
  result.mean_loss /= static_cast<double>(data.size());
  if (network.task == Task::Classification)
    result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

struct TrainResult {
  ParameterSet params;
  MetricsLog log;
};

// Runs the configured optimizer for `epochs` passes over the training split
// in the epoch-shuffle regime, recording per-iteration batch loss and
// per-evaluation full losses with wall-clock timestamps. A non-finite loss
// aborts the run and returns the log gathered so far (flagged on the log);
// all other errors propagate.
inline TrainResult train_run(const Dataset& train, const Dataset& test,
                             const RunConfig& config) {
  config.validate();
  if (train.size() == 0 || test.size() == 0)
    throw EmptyBatch("train_run: empty split");
  if (train.task != config.network.task || test.task != config.network.task)
    throw InvalidConfig("train_run: dataset task does not match the network");
  if (train.feature_width() != config.network.input_size())
    throw DimensionMismatch("train_run: feature width does not match the network");
  if (config.network.task == Task::Classification &&
      train.class_count != config.network.output_size())
    throw InvalidConfig("train_run: class count does not match network outputs");

  const std::size_t m = train.size();
  const std::size_t batch_size = config.optimizer.batch_size;
  const std::size_t per_epoch = (m + batch_size - 1) / batch_size;

  TrainResult result;
  result.params = init_params(config.network, config.optimizer.seed);
  SamplerState sampler = make_sampler(config.optimizer.seed);

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
        .count();
  };
  const auto record_eval = [&](std::size_t epoch, std::size_t step) {
    const EvalResult on_train = evaluate(config.network, result.params, train);
    const EvalResult on_test = evaluate(config.network, result.params, test);
    EpochRecord record;
    record.epoch = epoch;
    record.step = step;
    record.train_full_loss = on_train.mean_loss;
    record.test_loss = on_test.mean_loss;
    if (on_test.accuracy) {
      record.accuracy = *on_test.accuracy;
      record.has_accuracy = true;
    }
    record.elapsed_s = elapsed();
    result.log.epochs.push_back(record);
  };

  std::size_t step = 0;
  try {
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      for (std::size_t b = 0; b < per_epoch; ++b) {
        auto [batch, next_state] = sample_minibatch(train, batch_size, std::move(sampler));
        sampler = std::move(next_state);

        std::pair<ParameterSet, StepReport> outcome = [&] {
          switch (config.optimizer.kind) {
            case OptimizerKind::DnSgd:
              return dn_sgd_iteration(config.network, result.params, batch,
                                      config.optimizer);
            case OptimizerKind::SgdDn:
              return sgd_dn_iteration(config.network, result.params, batch,
                                      config.optimizer);
            case OptimizerKind::Sgd:
            default:
              return sgd_iteration(config.network, result.params, batch,
                                   config.optimizer);
          }
        }();
        if (!std::isfinite(outcome.second.batch_loss_before))
          throw NonFiniteLoss("train_run: non-finite batch loss");
        result.params = std::move(outcome.first);

        IterationRecord record;
        record.epoch = epoch;
        record.step = ++step;
        record.train_batch_loss = outcome.second.batch_loss_before;
        record.h_max = outcome.second.h_max;
        record.solver_status = outcome.second.solver_status;
        record.has_curvature = config.optimizer.kind != OptimizerKind::Sgd;
        record.elapsed_s = elapsed();
        result.log.iterations.push_back(record);

        if (config.eval.kind == EvalCadence::Kind::Iterations &&
            step % config.eval.every == 0)
          record_eval(epoch, step);
      }
      if (config.eval.kind == EvalCadence::Kind::Epoch) record_eval(epoch, step);
    }
  } catch (const NonFiniteLoss&) {
    result.log.aborted_non_finite = true;
  }
  return result;
}

}  // namespace dnsgd
