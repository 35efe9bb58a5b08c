// Command-line front end: train a single optimizer, compare the three
// optimizers on one dataset, or run the randomized property suites.
//
// Exit codes: 0 success, 1 configuration/data errors, 2 run aborted on a
// non-finite loss.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dnsgd/data.hpp"
#include "dnsgd/error.hpp"
#include "dnsgd/metrics.hpp"
#include "dnsgd/network.hpp"
#include "dnsgd/optimizer.hpp"
#include "dnsgd/plot.hpp"
#include "dnsgd/trainer.hpp"
#include "dnsgd/verify.hpp"

namespace {

struct CommonOptions {
  std::string data_path;
  std::string target_column;
  std::string task = "regression";
  std::vector<std::string> categorical;
  std::vector<std::size_t> layers;
  std::string activation = "sigmoid";
  double learning_rate = 0.01;
  double alpha = 0.0;
  std::size_t batch = 200;
  std::size_t epochs = 20;
  std::size_t test_size = 0;  // 0 = one fifth of the rows
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool log_scale = false;
};

void add_common_flags(CLI::App& cmd, CommonOptions& options) {
  cmd.add_option("--data", options.data_path, "Input CSV file (header row required)")
      ->required();
  cmd.add_option("--target", options.target_column, "Name of the target column")
      ->required();
  cmd.add_option("--task", options.task, "Problem kind")
      ->check(CLI::IsMember({"regression", "classification"}))
      ->capture_default_str();
  cmd.add_option("--categorical", options.categorical,
                 "Comma-separated categorical feature columns (one-hot encoded)")
      ->delimiter(',');
  cmd.add_option("--layers", options.layers,
                 "Comma-separated layer widths, input first (e.g. 10,5,1)")
      ->delimiter(',')
      ->required();
  cmd.add_option("--activation", options.activation, "Hidden-layer activation")
      ->check(CLI::IsMember({"sigmoid", "relu"}))
      ->capture_default_str();
  cmd.add_option("--lr", options.learning_rate, "Learning rate for the SGD updates")
      ->capture_default_str();
  cmd.add_option("--alpha", options.alpha, "Extra damping added to H_max")
      ->capture_default_str();
  cmd.add_option("--batch", options.batch, "Mini-batch size")->capture_default_str();
  cmd.add_option("--epochs", options.epochs, "Number of passes over the training split")
      ->capture_default_str();
  cmd.add_option("--test-size", options.test_size,
                 "Rows held out for testing (0 = one fifth of the dataset)")
      ->capture_default_str();
  cmd.add_option("--seed", options.seed,
                 "Seed for the split, initialization, and batch order")
      ->capture_default_str();
  cmd.add_option("--out", options.out_dir, "Output directory for CSV and SVG files")
      ->capture_default_str();
  cmd.add_flag("--log-scale", options.log_scale, "Plot losses on a log axis");
}

dnsgd::OptimizerKind parse_optimizer(const std::string& name) {
  // The hybrid methods also answer to their quasi-Newton aliases.
  if (name == "sgd") return dnsgd::OptimizerKind::Sgd;
  if (name == "dn-sgd" || name == "qn-sgd") return dnsgd::OptimizerKind::DnSgd;
  if (name == "sgd-dn" || name == "sgd-qn") return dnsgd::OptimizerKind::SgdDn;
  throw dnsgd::InvalidConfig("unknown optimizer '" + name + "'");
}

struct PreparedData {
  dnsgd::Dataset train;
  dnsgd::Dataset test;
};

PreparedData prepare(const CommonOptions& options) {
  dnsgd::CsvSchema schema;
  schema.target_column = options.target_column;
  schema.task = options.task == "regression" ? dnsgd::Task::Regression
                                             : dnsgd::Task::Classification;
  schema.categorical_columns = options.categorical;
  const dnsgd::Dataset full = dnsgd::load_csv(options.data_path, schema);

  std::size_t test_size = options.test_size;
  if (test_size == 0) test_size = std::max<std::size_t>(1, full.size() / 5);
  auto [raw_train, raw_test] = dnsgd::split(full, test_size, options.seed);
  auto [train, test, stats] = dnsgd::standardize(raw_train, raw_test);
  return {std::move(train), std::move(test)};
}

dnsgd::RunConfig make_run_config(const CommonOptions& options,
                                 const PreparedData& data,
                                 dnsgd::OptimizerKind kind) {
  dnsgd::RunConfig config;
  config.network.layer_sizes = options.layers;
  config.network.task = data.train.task;
  config.network.hidden_activation = options.activation == "relu"
                                         ? dnsgd::Activation::Relu
                                         : dnsgd::Activation::Sigmoid;
  config.optimizer.kind = kind;
  config.optimizer.learning_rate = options.learning_rate;
  config.optimizer.damping = options.alpha;
  config.optimizer.batch_size = options.batch;
  config.optimizer.seed = options.seed;
  config.epochs = options.epochs;
  config.validate();

  if (config.network.input_size() != data.train.feature_width())
    throw dnsgd::InvalidConfig(
        "--layers starts with " + std::to_string(config.network.input_size()) +
        " but the encoded dataset has " + std::to_string(data.train.feature_width()) +
        " feature columns");
  return config;
}

// Runs the requested optimizers and writes one metrics CSV each plus one
// combined SVG. Returns 2 if any run aborted on a non-finite loss.
int run_training(const CommonOptions& options,
                 const std::vector<dnsgd::OptimizerKind>& kinds,
                 const std::string& svg_name) {
  const PreparedData data = prepare(options);
  std::filesystem::create_directories(options.out_dir);

  bool aborted = false;
  std::vector<std::pair<std::string, dnsgd::MetricsLog>> runs;
  for (const dnsgd::OptimizerKind kind : kinds) {
    const dnsgd::RunConfig config = make_run_config(options, data, kind);
    const dnsgd::TrainResult result = dnsgd::train_run(data.train, data.test, config);
    const std::string name = dnsgd::optimizer_name(kind);
    const std::string run_id = name + "-seed" + std::to_string(options.seed);
    const std::string csv_path =
        (std::filesystem::path(options.out_dir) / ("metrics_" + name + ".csv")).string();
    dnsgd::write_metrics_csv(result.log, run_id, kind, csv_path);
    std::printf("%s: %zu iterations, %zu evaluations -> %s\n", name.c_str(),
                result.log.iterations.size(), result.log.epochs.size(),
                csv_path.c_str());
    if (result.log.aborted_non_finite) {
      std::fprintf(stderr, "%s: aborted on a non-finite loss\n", name.c_str());
      aborted = true;
    }
    if (!result.log.epochs.empty()) {
      const auto& last = result.log.epochs.back();
      std::printf("%s: final train loss %.6g, test loss %.6g\n", name.c_str(),
                  last.train_full_loss, last.test_loss);
    }
    runs.emplace_back(name, std::move(result.log));
  }

  const std::string svg_path =
      (std::filesystem::path(options.out_dir) / svg_name).string();
  dnsgd::write_svg(dnsgd::comparison_panels(runs), options.log_scale, svg_path);
  std::printf("plots -> %s\n", svg_path.c_str());
  return aborted ? 2 : 0;
}

int run_verify_command(std::uint64_t seed, bool inject_fault) {
  dnsgd::VerifyOptions options;
  options.seed = seed;
  options.inject_psd_fault = inject_fault;
  const std::vector<dnsgd::PropertyResult> results =
      dnsgd::run_property_suites(options);

  bool all_passed = true;
  std::printf("%-32s %-6s %-10s %s\n", "property", "result", "instances", "detail");
  for (const auto& r : results) {
    std::printf("%-32s %-6s %-10zu %s\n", r.name.c_str(), r.passed ? "pass" : "FAIL",
                r.instances, r.detail.c_str());
    all_passed = all_passed && r.passed;
  }
  if (!all_passed) {
    std::fprintf(stderr, "verify: failing properties:");
    for (const auto& r : results)
      if (!r.passed) std::fprintf(stderr, " %s", r.name.c_str());
    std::fprintf(stderr, "\n");
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feed-forward network training with hybrid damped-Newton/SGD optimizers"};
  app.require_subcommand(1);

  CommonOptions train_options;
  std::string optimizer_name = "dn-sgd";
  CLI::App* train_cmd =
      app.add_subcommand("train", "Run one optimizer and write its metrics");
  add_common_flags(*train_cmd, train_options);
  train_cmd->add_option("--optimizer", optimizer_name,
                        "One of sgd, dn-sgd, sgd-dn (aliases qn-sgd, sgd-qn)")
      ->check(CLI::IsMember({"sgd", "dn-sgd", "sgd-dn", "qn-sgd", "sgd-qn"}))
      ->capture_default_str();

  CommonOptions compare_options;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Run sgd, dn-sgd, and sgd-dn with identical seeds and data");
  add_common_flags(*compare_cmd, compare_options);

  std::uint64_t verify_seed = 0;
  bool inject_fault = false;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run the randomized property suites");
  verify_cmd->add_option("--seed", verify_seed, "Seed for the random instances")
      ->capture_default_str();
  verify_cmd->add_flag("--inject-psd-fault", inject_fault,
                       "Self-test hook: negate one Hessian so the PSD suite fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit cleanly, parse errors -> 1
  }

  try {
    if (train_cmd->parsed())
      return run_training(train_options, {parse_optimizer(optimizer_name)},
                          "train.svg");
    if (compare_cmd->parsed())
      return run_training(compare_options,
                          {dnsgd::OptimizerKind::Sgd, dnsgd::OptimizerKind::DnSgd,
                           dnsgd::OptimizerKind::SgdDn},
                          "compare.svg");
    if (verify_cmd->parsed()) return run_verify_command(verify_seed, inject_fault);
  } catch (const dnsgd::Error& e) {
    std::fprintf(stderr, "dnsgd: %s\n", e.what());
    return 1;
  }
  return 0;
}
