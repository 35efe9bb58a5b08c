#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dnsgd/error.hpp"
#include "dnsgd/network.hpp"

namespace dnsgd {

// In-memory dataset: m feature rows plus either scalar regression targets or
// contiguous class indices.
struct Dataset {
  Task task = Task::Regression;
  std::vector<Vector> features;
  std::vector<double> regression_targets;       // used when task == Regression
  std::vector<std::size_t> class_targets;       // used when task == Classification
  std::size_t class_count = 0;

  std::size_t size() const { return features.size(); }
  std::size_t feature_width() const { return features.empty() ? 0 : features[0].size(); }

  Vector target_vector(std::size_t row) const {
    if (task == Task::Regression) return {regression_targets[row]};
    Vector onehot(class_count, 0.0);
    onehot[class_targets[row]] = 1.0;
    return onehot;
  }

  Sample sample(std::size_t row) const { return {features[row], target_vector(row)}; }
};

// The entire dataset, or the rows named by `indices`, as a batch of samples.
inline Batch to_batch(const Dataset& data) {
  Batch batch;
  batch.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) batch.push_back(data.sample(i));
  return batch;
}

inline Batch to_batch(const Dataset& data, const std::vector<std::size_t>& indices) {
  Batch batch;
  batch.reserve(indices.size());
  for (std::size_t i : indices) batch.push_back(data.sample(i));
  return batch;
}

// Column statistics of the training split. Regression target statistics ride
// along so predictions can be mapped back to the original scale.
struct StandardizationStats {
  Vector mean;
  Vector stddev;
  double target_mean = 0.0;
  double target_stddev = 0.0;
};

// Threshold below which a column counts as constant and standardizes to zero.
inline constexpr double kConstantColumnTol = 1e-12;

// z-scores every feature column of both splits with statistics computed on
// the training split alone (population std, divisor m). Constant columns map
// to zeros. Regression targets get the same treatment; class indices pass
// through untouched.
inline std::tuple<Dataset, Dataset, StandardizationStats> standardize(
    const Dataset& train, const Dataset& other) {
  if (train.size() == 0) throw EmptyBatch("standardize: empty training split");
  if (other.size() > 0 && other.feature_width() != train.feature_width())
    throw DimensionMismatch("standardize: splits have different feature widths");

  const std::size_t width = train.feature_width();
  const double m = static_cast<double>(train.size());
  StandardizationStats stats;
  stats.mean.assign(width, 0.0);
  stats.stddev.assign(width, 0.0);
  for (const Vector& row : train.features)
    for (std::size_t c = 0; c < width; ++c) stats.mean[c] += row[c];
  for (double& v : stats.mean) v /= m;
  for (const Vector& row : train.features)
    for (std::size_t c = 0; c < width; ++c) {
      const double d = row[c] - stats.mean[c];
      stats.stddev[c] += d * d;
    }
  for (double& v : stats.stddev) v = std::sqrt(v / m);

  if (train.task == Task::Regression) {
    for (double y : train.regression_targets) stats.target_mean += y;
    stats.target_mean /= m;
    for (double y : train.regression_targets) {
      const double d = y - stats.target_mean;
      stats.target_stddev += d * d;
    }
    stats.target_stddev = std::sqrt(stats.target_stddev / m);
  }

  const auto transform = [&](const Dataset& src) {
    Dataset out = src;
    for (Vector& row : out.features)
      for (std::size_t c = 0; c < width; ++c)
        row[c] = stats.stddev[c] < kConstantColumnTol
                     ? 0.0
                     : (row[c] - stats.mean[c]) / stats.stddev[c];
    if (out.task == Task::Regression)
      for (double& y : out.regression_targets)
        y = stats.target_stddev < kConstantColumnTol
                ? 0.0
                : (y - stats.target_mean) / stats.target_stddev;
    return out;
  };
  return {transform(train), transform(other), stats};
}

// Seeded random partition into (train, test) with exact sizes.
inline std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t test_size,
                                         std::uint64_t seed) {
  const std::size_t m = data.size();
  if (test_size == 0 || test_size >= m)
    throw BadSplitSize("split: test size must satisfy 0 < test_size < m");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.task = data.task;
    part.class_count = data.class_count;
    for (std::size_t i = begin; i < end; ++i) {
      part.features.push_back(data.features[order[i]]);
      if (data.task == Task::Regression)
        part.regression_targets.push_back(data.regression_targets[order[i]]);
      else
        part.class_targets.push_back(data.class_targets[order[i]]);
    }
    return part;
  };
  return {take(test_size, m), take(0, test_size)};
}

// Mini-batch sampler state for the epoch-shuffle regime: one permutation per
// epoch, served in consecutive chunks (last chunk may be short). The state is
// a value; passing it by copy and using the returned state keeps runs
// reproducible and independent.
struct SamplerState {
  std::mt19937_64 rng;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::size_t epochs_started = 0;
};

inline SamplerState make_sampler(std::uint64_t seed) {
  SamplerState state;
  state.rng.seed(seed);
  return state;
}

// Serves the next chunk of up to `batch_size` samples, reshuffling at epoch
// boundaries with the generator carried in the state.
inline std::pair<Batch, SamplerState> sample_minibatch(const Dataset& train,
                                                       std::size_t batch_size,
                                                       SamplerState state) {
  const std::size_t m = train.size();
  if (batch_size == 0) throw InvalidConfig("sample_minibatch: batch size must be >= 1");
  if (batch_size > m)
    throw BatchTooLarge("sample_minibatch: batch size exceeds training size");

  if (state.order.size() != m || state.cursor >= m) {
    state.order.resize(m);
    std::iota(state.order.begin(), state.order.end(), 0);
    std::shuffle(state.order.begin(), state.order.end(), state.rng);
    state.cursor = 0;
    ++state.epochs_started;
  }
  const std::size_t end = std::min(state.cursor + batch_size, m);
  std::vector<std::size_t> indices(state.order.begin() + state.cursor,
                                   state.order.begin() + end);
  state.cursor = end;
  return {to_batch(train, indices), std::move(state)};
}

// What load_csv should make of the file: which column is the target, how to
// read it, and which feature columns are categorical (one-hot expanded).
struct CsvSchema {
  std::string target_column;
  Task task = Task::Regression;
  std::vector<std::string> categorical_columns;
};

namespace detail {

// Splits one CSV record into fields. Quoted fields may contain commas and
// doubled quotes; multi-line fields are not supported.
inline std::vector<std::string> split_csv_record(const std::string& line,
                                                 std::size_t row_number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw ParseError("csv row " + std::to_string(row_number) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

inline double parse_number(const std::string& field, std::size_t row_number,
                           const std::string& column) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("csv row " + std::to_string(row_number) + ", column '" + column +
                     "': not a number: '" + field + "'");
  return value;
}

}  // namespace detail

// Loads an RFC-4180-style CSV (header row, comma separators, optional
// quoting). Numeric feature columns become one value each; categorical
// columns are one-hot expanded over their distinct values in order of first
// appearance; classification targets map to contiguous class indices the same
// way. Row order is preserved.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream file(path);
  if (!file) throw ParseError("load_csv: cannot open '" + path + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2) throw EmptyFile("load_csv: '" + path + "' has no data rows");

  const std::vector<std::string> header = detail::split_csv_record(lines[0], 1);
  const auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw MissingColumn("load_csv: no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t target = column_index(schema.target_column);
  std::vector<bool> categorical(header.size(), false);
  for (const std::string& name : schema.categorical_columns) {
    const std::size_t idx = column_index(name);
    if (idx == target)
      throw InvalidConfig("load_csv: target column listed as categorical");
    categorical[idx] = true;
  }

  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    std::vector<std::string> fields = detail::split_csv_record(lines[r], r + 1);
    if (fields.size() != header.size())
      throw ParseError("csv row " + std::to_string(r + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }

  // First pass: vocabularies for categorical columns and class labels, in
  // order of first appearance.
  std::vector<std::vector<std::string>> vocab(header.size());
  const auto vocab_index = [](std::vector<std::string>& words,
                              const std::string& value) {
    const auto it = std::find(words.begin(), words.end(), value);
    if (it != words.end()) return static_cast<std::size_t>(it - words.begin());
    words.push_back(value);
    return words.size() - 1;
  };
  std::vector<std::string> labels;
  for (const auto& fields : rows) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != target && categorical[c]) vocab_index(vocab[c], fields[c]);
    if (schema.task == Task::Classification) vocab_index(labels, fields[target]);
  }

  Dataset data;
  data.task = schema.task;
  data.class_count = labels.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    Vector row;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target) continue;
      if (categorical[c]) {
        Vector onehot(vocab[c].size(), 0.0);
        onehot[vocab_index(vocab[c], fields[c])] = 1.0;
        row.insert(row.end(), onehot.begin(), onehot.end());
      } else {
        row.push_back(detail::parse_number(fields[c], r + 2, header[c]));
      }
    }
    data.features.push_back(std::move(row));
    if (schema.task == Task::Regression)
      data.regression_targets.push_back(
          detail::parse_number(fields[target], r + 2, header[target]));
    else
      data.class_targets.push_back(vocab_index(labels, fields[target]));
  }
  return data;
}

}  // namespace dnsgd
