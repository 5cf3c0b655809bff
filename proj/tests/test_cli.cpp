// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tlens/cli.hpp"
#include "tlens/csvio.hpp"
#include "tlens/datagen.hpp"
#include "tlens/image.hpp"
#include "tlens/store.hpp"

using namespace tlens;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("tlens");
  for (const auto& a : args) argv.push_back(a.c_str());

  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::filesystem::path workspace() {
  static std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "tlens_cli_tests";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    generate_probe_dataset(d / "data", 2, 77, "what color?");
    std::ofstream cfg(d / "toy.yaml");
    cfg << "architecture: toy-vlm\n"
        << "model_path: toy/cli\n"
        << "model:\n  - torch_dtype: auto\n"
        << "output_db: out/cli.db\n"
        << "input_dir: ./data/images/\n"
        << "prompt: \"describe the color\"\n"
        << "modules:\n  - blocks.0.norm\n  - head\n";
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("modules subcommand prints layer names and nothing to stderr") {
  const auto dir = workspace();
  const CliResult r = run_cli({"modules", "--config", (dir / "toy.yaml").string()});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("blocks.0.norm\n") != std::string::npos);
  CHECK(r.out.find("head\n") != std::string::npos);
  CHECK(r.err.empty());
}

TEST_CASE("--log-named-modules alias works at top level and under extract") {
  const auto dir = workspace();
  const CliResult top = run_cli({"--log-named-modules", "--config", (dir / "toy.yaml").string()});
  CHECK(top.exit_code == 0);
  CHECK(top.out.find("blocks.0.norm") != std::string::npos);

  const CliResult sub =
      run_cli({"extract", "--config", (dir / "toy.yaml").string(), "--log-named-modules"});
  CHECK(sub.exit_code == 0);
  CHECK(sub.out.find("blocks.0.norm") != std::string::npos);
  // no inference ran: the store file is not created by the alias
}

TEST_CASE("extract creates the store at the config's output_db") {
  const auto dir = workspace();
  std::filesystem::remove(dir / "out" / "cli.db");
  const CliResult r = run_cli({"extract", "--config", (dir / "toy.yaml").string(),
                               "--labels", (dir / "data" / "labels.csv").string()});
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
  REQUIRE(std::filesystem::exists(dir / "out" / "cli.db"));
  ActivationStore store(dir / "out" / "cli.db");
  // 40 images (2 per class across 20 class slots) x 2 layers
  CHECK(store.count() == 80);
  // labels came along
  const auto rows = store.query({{"layer", "head"}});
  REQUIRE(!rows.empty());
  CHECK(rows.front().record.label.has_value());
}

TEST_CASE("missing required flags exit 2 with usage") {
  const CliResult r = run_cli({"extract"});
  CHECK(r.exit_code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("unknown subcommand exits 2") {
  const CliResult r = run_cli({"analyze-everything"});
  CHECK(r.exit_code == 2);
}

TEST_CASE("no arguments prints usage and exits 2") {
  const CliResult r = run_cli({});
  CHECK(r.exit_code == 2);
}

TEST_CASE("config errors exit 1 with a one-line diagnostic") {
  const auto dir = workspace();
  std::ofstream bad(dir / "bad.yaml");
  bad << "architecture: toy-vlm\n";  // missing everything else
  bad.close();
  const CliResult r = run_cli({"extract", "--config", (dir / "bad.yaml").string()});
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("missing required field") != std::string::npos);
}

TEST_CASE("plot is a pure function of its inputs") {
  const auto dir = workspace();
  std::ofstream csv(dir / "results.csv");
  csv << "split,layer,main_acc,control_acc,n_test,z,stars,best_lr,best_epochs,best_batch\n"
      << "color,head,0.95,0.20,40,7.1,***,0.001,30,32\n"
      << "shape,head,0.55,0.45,40,0.9,none,0.001,30,32\n";
  csv.close();

  const auto svg1 = (dir / "p1.svg").string();
  const auto svg2 = (dir / "p2.svg").string();
  CHECK(run_cli({"plot", "--probe-results", (dir / "results.csv").string(), "--output",
                 svg1, "--seed", "3"})
            .exit_code == 0);
  CHECK(run_cli({"plot", "--probe-results", (dir / "results.csv").string(), "--output",
                 svg2, "--seed", "3"})
            .exit_code == 0);
  const auto b1 = read_file_bytes(svg1);
  const auto b2 = read_file_bytes(svg2);
  CHECK(b1 == b2);  // byte-identical
  CHECK(!b1.empty());

  // exactly one input kind
  const CliResult both = run_cli({"plot", "--probe-results", (dir / "results.csv").string(),
                                  "--concept-surfaces", (dir / "results.csv").string(),
                                  "--output", svg1});
  CHECK(both.exit_code == 2);
}

TEST_CASE("bench subcommand emits a JSON report") {
  const auto dir = workspace();
  const auto json_path = (dir / "bench.json").string();
  const CliResult r = run_cli({"bench", "--config", (dir / "toy.yaml").string(),
                               "--output", json_path, "--seed", "9"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("Peak Mem") != std::string::npos);
  const auto bytes = read_file_bytes(json_path);
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("export subcommand dumps blobs and manifest") {
  const auto dir = workspace();
  // reuse the store created by the extract test (order-independent: re-extract)
  run_cli({"extract", "--config", (dir / "toy.yaml").string()});
  const CliResult r = run_cli({"export", "--db", (dir / "out" / "cli.db").string(),
                               "--output", (dir / "exported").string()});
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "exported" / "manifest.json"));
}
