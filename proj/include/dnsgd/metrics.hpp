#pragma once

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dnsgd/error.hpp"
#include "dnsgd/optimizer.hpp"

namespace dnsgd {

// One row per optimizer iteration: the mini-batch loss before the update and
// the Newton diagnostics (meaningful only for the hybrid optimizers).
struct IterationRecord {
  std::size_t epoch = 0;  // 1-based epoch the iteration belongs to
  std::size_t step = 0;   // 1-based global iteration index
  double train_batch_loss = 0.0;
  double h_max = 0.0;
  SolverStatus solver_status = SolverStatus::Ok;
  bool has_curvature = false;  // false for plain SGD rows
  double elapsed_s = 0.0;
};

// One row per evaluation point (every epoch by default): losses over the
// full training and test splits.
struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;  // iterations completed so far
  double train_full_loss = 0.0;
  double test_loss = 0.0;
  double accuracy = 0.0;  // classification only
  bool has_accuracy = false;
  double elapsed_s = 0.0;
};

struct MetricsLog {
  std::vector<IterationRecord> iterations;
  std::vector<EpochRecord> epochs;
  bool aborted_non_finite = false;
};

namespace detail {

inline std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace detail

inline const char* optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::DnSgd: return "dn-sgd";
    case OptimizerKind::SgdDn: return "sgd-dn";
  }
  return "unknown";
}

// Writes the metrics CSV: header plus one row per iteration and one per
// evaluation point, interleaved in chronological order. Cells that do not
// apply to a row kind stay empty. The file appears atomically (temp file
// then rename).
inline void write_metrics_csv(const MetricsLog& log, const std::string& run_id,
                              OptimizerKind kind, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary);  // LF newlines everywhere
    if (!file) throw Error("write_metrics_csv: cannot open '" + tmp + "'");
    file << "run_id,optimizer,epoch,step,train_batch_loss,train_full_loss,"
            "test_loss,accuracy,h_max,solver_status,elapsed_s\n";

    const char* name = optimizer_name(kind);
    std::size_t next_epoch_row = 0;
    const auto write_epoch_row = [&](const EpochRecord& e) {
      file << run_id << ',' << name << ',' << e.epoch << ',' << e.step << ",,"
           << detail::format_g17(e.train_full_loss) << ','
           << detail::format_g17(e.test_loss) << ','
           << (e.has_accuracy ? detail::format_g17(e.accuracy) : "") << ",,,"
           << detail::format_g17(e.elapsed_s) << '\n';
    };
    for (const IterationRecord& it : log.iterations) {
      while (next_epoch_row < log.epochs.size() &&
             log.epochs[next_epoch_row].step < it.step)
        write_epoch_row(log.epochs[next_epoch_row++]);
      file << run_id << ',' << name << ',' << it.epoch << ',' << it.step << ','
           << detail::format_g17(it.train_batch_loss) << ",,,,";
      if (it.has_curvature)
        file << detail::format_g17(it.h_max) << ','
             << (it.solver_status == SolverStatus::Ok ? "ok" : "fell_back_to_gradient");
      else
        file << ',';
      file << ',' << detail::format_g17(it.elapsed_s) << '\n';
    }
    while (next_epoch_row < log.epochs.size())
      write_epoch_row(log.epochs[next_epoch_row++]);
    if (!file) throw Error("write_metrics_csv: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dnsgd
