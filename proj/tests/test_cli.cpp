// End-to-end tests that spawn the command-line binary, plus structural checks
// of the SVG renderer it uses. The binary path is injected by the build as
// DNSGD_CLI_PATH.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include "dnsgd/metrics.hpp"
#include "dnsgd/plot.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args) {
  static int call_index = 0;
  const fs::path capture =
      fs::temp_directory_path() / ("dnsgd_cli_capture_" + std::to_string(call_index++));
  const std::string command =
      std::string(DNSGD_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = read_file(capture);
  fs::remove(capture);
  return result;
}

// Fresh empty directory under the system temp root.
fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path fixture_csv() { return fs::path(DNSGD_TEST_DATA_DIR) / "fixture20.csv"; }

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Drops the trailing elapsed-seconds field from every CSV line so that two
// runs can be compared without the wall-clock noise.
std::string strip_timing_column(const std::string& csv_text) {
  std::ostringstream out;
  for (const std::string& line : split_lines(csv_text)) {
    const std::size_t last_comma = line.rfind(',');
    REQUIRE(last_comma != std::string::npos);
    out << line.substr(0, last_comma) << '\n';
  }
  return out.str();
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

// Mixed-class rows with a constant feature: no separating boundary exists, so
// a huge learning rate saturates the softmax and the next opposite-class
// sample drives the loss to infinity.
fs::path inseparable_csv(const fs::path& dir) {
  const fs::path path = dir / "inseparable.csv";
  std::ofstream out(path);
  out << "x,label\n";
  for (int i = 0; i < 6; ++i) out << "1.0,c" << i % 2 << "\n";
  return path;
}

}  // namespace

TEST_CASE("compare writes one metrics file per optimizer plus a plot", "[cli]") {
  const fs::path out = scratch_dir("dnsgd_cli_compare");
  const CliResult run = run_cli(
      "compare --data " + fixture_csv().string() +
      " --target target --task regression --categorical color --layers 5,3,1 --batch 8 --epochs 3"
      " --seed 4 --out " + out.string());
  INFO(run.output);
  REQUIRE(run.exit_code == 0);

  for (const std::string name : {"sgd", "dn-sgd", "sgd-dn"}) {
    const fs::path csv = out / ("metrics_" + name + ".csv");
    REQUIRE(fs::exists(csv));
    const std::vector<std::string> lines = split_lines(read_file(csv));
    // 20 rows -> 4 test, 16 train; batch 8 -> 2 steps per epoch; 3 epochs ->
    // 6 iteration rows + 3 evaluation rows + header.
    REQUIRE(lines.size() == 10);
    REQUIRE(lines[0] ==
            "run_id,optimizer,epoch,step,train_batch_loss,train_full_loss,"
            "test_loss,accuracy,h_max,solver_status,elapsed_s");
    for (std::size_t i = 1; i < lines.size(); ++i)
      REQUIRE(lines[i].rfind(name + "-seed4," + name + ",", 0) == 0);
  }

  const fs::path svg = out / "compare.svg";
  REQUIRE(fs::exists(svg));
  const std::string image = read_file(svg);
  REQUIRE(image.rfind("<svg", 0) == 0);
  REQUIRE(occurrences(image, "<g class=\"panel\">") == 3);
  // Three optimizers in the step and time panels, three in the epoch panel.
  REQUIRE(occurrences(image, "<polyline") == 9);
}

TEST_CASE("repeated runs are identical outside the timing column", "[cli]") {
  const fs::path out_a = scratch_dir("dnsgd_cli_det_a");
  const fs::path out_b = scratch_dir("dnsgd_cli_det_b");
  const std::string args =
      "compare --data " + fixture_csv().string() +
      " --target target --task regression --categorical color --layers 5,3,1 --batch 8 --epochs 3"
      " --seed 9 --out ";
  REQUIRE(run_cli(args + out_a.string()).exit_code == 0);
  REQUIRE(run_cli(args + out_b.string()).exit_code == 0);

  for (const std::string name : {"sgd", "dn-sgd", "sgd-dn"}) {
    const std::string a = strip_timing_column(read_file(out_a / ("metrics_" + name + ".csv")));
    const std::string b = strip_timing_column(read_file(out_b / ("metrics_" + name + ".csv")));
    REQUIRE(a == b);
    // Guard against comparing empty husks: the loss column must carry digits.
    REQUIRE(occurrences(a, ".") > 6);
  }
}

TEST_CASE("train accepts the quasi-Newton aliases", "[cli]") {
  const fs::path out = scratch_dir("dnsgd_cli_alias");
  const CliResult run = run_cli(
      "train --data " + fixture_csv().string() +
      " --target target --categorical color --layers 5,3,1 --optimizer qn-sgd --batch 8 --epochs 2"
      " --out " + out.string());
  INFO(run.output);
  REQUIRE(run.exit_code == 0);
  REQUIRE(fs::exists(out / "metrics_dn-sgd.csv"));
  REQUIRE(fs::exists(out / "train.svg"));
  const std::string csv = read_file(out / "metrics_dn-sgd.csv");
  REQUIRE(csv.find(",dn-sgd,") != std::string::npos);
}

TEST_CASE("verify passes by default and honors the fault hook", "[cli]") {
  const CliResult clean = run_cli("verify");
  INFO(clean.output);
  REQUIRE(clean.exit_code == 0);
  for (const std::string name :
       {"mse-last-hessian-psd", "cel-last-hessian-psd", "penultimate-relu-kron-psd",
        "penultimate-b-rank-one", "cel-kron-factorization",
        "softmax-quadratic-identity", "backprop-gradient-fd",
        "last-hessian-fd-jacobian"})
    REQUIRE(clean.output.find(name) != std::string::npos);
  REQUIRE(occurrences(clean.output, "pass") == 8);
  REQUIRE(clean.output.find("FAIL") == std::string::npos);

  const CliResult reseeded = run_cli("verify --seed 123");
  REQUIRE(reseeded.exit_code == 0);

  const CliResult faulted = run_cli("verify --inject-psd-fault");
  INFO(faulted.output);
  REQUIRE(faulted.exit_code == 1);
  REQUIRE(faulted.output.find("FAIL") != std::string::npos);
  REQUIRE(faulted.output.find("failing properties: mse-last-hessian-psd") !=
          std::string::npos);
}

TEST_CASE("configuration and data errors exit with code one", "[cli]") {
  const fs::path out = scratch_dir("dnsgd_cli_errors");

  SECTION("missing file") {
    const CliResult run = run_cli(
        "train --data " + (out / "absent.csv").string() +
        " --target y --layers 2,1 --out " + out.string());
    REQUIRE(run.exit_code == 1);
    REQUIRE(run.output.find("cannot open") != std::string::npos);
  }
  SECTION("layer width does not match the encoded features") {
    const CliResult run = run_cli(
        "train --data " + fixture_csv().string() +
        " --target target --categorical color --layers 7,1 --batch 8 --out " + out.string());
    REQUIRE(run.exit_code == 1);
    REQUIRE(run.output.find("feature columns") != std::string::npos);
  }
  SECTION("batch larger than the training split") {
    const CliResult run = run_cli(
        "train --data " + fixture_csv().string() +
        " --target target --categorical color --layers 5,3,1 --batch 200 --out " + out.string());
    REQUIRE(run.exit_code == 1);
  }
  SECTION("unknown optimizer is a parse error") {
    const CliResult run = run_cli(
        "train --data " + fixture_csv().string() +
        " --target target --layers 5,3,1 --optimizer bogus --out " + out.string());
    REQUIRE(run.exit_code == 1);
  }
  SECTION("missing required flags") {
    REQUIRE(run_cli("train --target y").exit_code == 1);
  }
}

TEST_CASE("a run that hits a non-finite loss exits with code two", "[cli]") {
  const fs::path out = scratch_dir("dnsgd_cli_diverge");
  const fs::path data = inseparable_csv(out);
  const CliResult run = run_cli(
      "train --data " + data.string() +
      " --target label --task classification --layers 1,2 --optimizer sgd"
      " --lr 1e6 --batch 1 --epochs 3 --out " + out.string());
  INFO(run.output);
  REQUIRE(run.exit_code == 2);
  REQUIRE(run.output.find("non-finite") != std::string::npos);
  // The truncated log is still written.
  REQUIRE(fs::exists(out / "metrics_sgd.csv"));
}

TEST_CASE("help exits cleanly", "[cli]") {
  REQUIRE(run_cli("--help").exit_code == 0);
  REQUIRE(run_cli("train --help").exit_code == 0);
}

TEST_CASE("svg renderer draws one polyline and legend entry per series", "[plot]") {
  dnsgd::Panel panel{"losses", "step", "loss", {}};
  panel.series.push_back({"alpha", {1, 2, 3}, {3.0, 2.0, 1.0}});
  panel.series.push_back({"beta", {1, 2, 3}, {1.5, 1.0, 0.5}});
  const std::string image = dnsgd::render_svg({panel}, false);

  REQUIRE(image.rfind("<svg", 0) == 0);
  REQUIRE(image.find("</svg>") != std::string::npos);
  REQUIRE(occurrences(image, "<polyline") == 2);
  REQUIRE(image.find(">alpha</text>") != std::string::npos);
  REQUIRE(image.find(">beta</text>") != std::string::npos);
  REQUIRE(image.find(">losses</text>") != std::string::npos);
  REQUIRE(image.find("nan") == std::string::npos);
  REQUIRE(image.find("inf") == std::string::npos);
}

TEST_CASE("svg renderer survives flat and nonpositive data", "[plot]") {
  SECTION("constant series still produces finite coordinates") {
    dnsgd::Panel panel{"flat", "x", "y", {{"c", {0, 1, 2}, {0.25, 0.25, 0.25}}}};
    const std::string image = dnsgd::render_svg({panel}, false);
    REQUIRE(image.find("nan") == std::string::npos);
    REQUIRE(occurrences(image, "<polyline") == 1);
  }
  SECTION("log scale clamps zeros instead of producing -inf") {
    dnsgd::Panel panel{"log", "x", "y", {{"c", {0, 1, 2}, {1.0, 0.01, 0.0}}}};
    const std::string image = dnsgd::render_svg({panel}, true);
    REQUIRE(image.find("nan") == std::string::npos);
    REQUIRE(image.find("inf") == std::string::npos);
    // Tick labels come from the data range 10^-2..10^0.
    REQUIRE(image.find(">0.01</text>") != std::string::npos);
    REQUIRE(image.find(">1</text>") != std::string::npos);
  }
  SECTION("empty panel list renders a bare document") {
    const std::string image = dnsgd::render_svg({}, false);
    REQUIRE(image.rfind("<svg", 0) == 0);
    REQUIRE(occurrences(image, "<polyline") == 0);
  }
}

TEST_CASE("comparison panels expose the three standard views", "[plot]") {
  dnsgd::MetricsLog log;
  log.iterations.push_back({1, 1, 0.5, 2.0, dnsgd::SolverStatus::Ok, true, 0.1});
  log.iterations.push_back({1, 2, 0.4, 2.0, dnsgd::SolverStatus::Ok, true, 0.2});
  log.epochs.push_back({1, 2, 0.45, 0.5, 0.0, false, 0.25});

  const std::vector<dnsgd::Panel> panels =
      dnsgd::comparison_panels({{"dn-sgd", log}, {"sgd", log}});
  REQUIRE(panels.size() == 3);
  REQUIRE(panels[0].title == "train loss vs step");
  REQUIRE(panels[1].title == "test loss vs epoch");
  REQUIRE(panels[2].title == "train loss vs time");
  for (const dnsgd::Panel& panel : panels) {
    REQUIRE(panel.series.size() == 2);
    REQUIRE(panel.series[0].label == "dn-sgd");
    REQUIRE(panel.series[1].label == "sgd");
  }
  REQUIRE(panels[0].series[0].x == std::vector<double>{1.0, 2.0});
  REQUIRE(panels[0].series[0].y == std::vector<double>{0.5, 0.4});
  REQUIRE(panels[1].series[0].x == std::vector<double>{1.0});
  REQUIRE(panels[1].series[0].y == std::vector<double>{0.5});
  REQUIRE(panels[2].series[0].x == std::vector<double>{0.1, 0.2});

  const fs::path out = scratch_dir("dnsgd_cli_plotfile") / "figure.svg";
  dnsgd::write_svg(panels, false, out.string());
  REQUIRE(fs::exists(out));
  REQUIRE(read_file(out).rfind("<svg", 0) == 0);
}
