// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "tlens/bench.hpp"
#include "tlens/datagen.hpp"
#include "tlens/extraction.hpp"
#include "tlens/image.hpp"
#include "tlens/rng.hpp"
#include "tlens/toy_vlm.hpp"

using namespace tlens;

namespace {

struct NullSink : RecordSink {
  std::int64_t n = 0;
  std::int64_t insert(const ActivationRecord&) override { return ++n; }
};

// busy-waits so the added time per record is precise
struct SpinDelaySink : RecordSink {
  std::chrono::microseconds delay;
  std::int64_t n = 0;
  explicit SpinDelaySink(std::chrono::microseconds d) : delay(d) {}
  std::int64_t insert(const ActivationRecord&) override {
    const auto end = std::chrono::steady_clock::now() + delay;
    while (std::chrono::steady_clock::now() < end) {
    }
    return ++n;
  }
};

// fires one layer whose output tensor has a configurable element count
class BigTensorAdapter : public ModelAdapter {
 public:
  explicit BigTensorAdapter(std::int64_t elems) : elems_(elems) {
    identity_ = {"test/big-tensor", "test"};
  }
  const ModelIdentity& identity() const override { return identity_; }
  std::vector<std::string> named_layers() const override { return {"blob"}; }
  int layer_count() const override { return 1; }
  std::string probe_layer_name(int) const override { return "blob"; }
  ModelInput preprocess(const std::vector<std::uint8_t>&, const std::string& path,
                        const std::string& prompt) const override {
    ModelInput input;
    input.image_path = path;
    input.prompt = prompt;
    input.patches = Tensor({1, 1}, {1.0f});
    return input;
  }
  Tensor forward(const ModelInput&) override {
    Tensor t = Tensor::zeros({elems_});
    for (std::int64_t i = 0; i < elems_; ++i) {
      t.data[static_cast<std::size_t>(i)] = static_cast<float>(i % 97);
    }
    hooks_.fire("blob", t);
    return t;
  }
  std::uint64_t param_count() const override { return 0; }

 private:
  ModelIdentity identity_;
  std::int64_t elems_;
};

std::filesystem::path image_dir(const std::string& name, int count) {
  const auto dir = std::filesystem::temp_directory_path() / "tlens_bench" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Rng rng(17);
  for (int i = 0; i < count; ++i) {
    Image img;
    img.width = 16;
    img.height = 16;
    img.rgb.resize(16 * 16 * 3);
    for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    write_png(dir / ("img_" + std::to_string(i) + ".png"), img);
  }
  return dir;
}

ExtractionConfig bench_config(const std::filesystem::path& dir,
                              const std::vector<std::string>& modules,
                              const std::string& arch = "toy-vlm") {
  ExtractionConfig cfg;
  cfg.architecture = arch;
  cfg.model_path = "toy/bench";
  cfg.output_db = "unused.db";
  cfg.input_dir = dir.string();
  cfg.prompt = "p";
  cfg.modules = modules;
  return cfg;
}

}  // namespace

TEST_CASE("per-instance time is exactly total over n") {
  BenchmarkReport report;
  report.total_inference_s = 2.0;
  report.n_instances = 100;
  report.per_instance_s = report.total_inference_s / report.n_instances;
  CHECK(report.per_instance_s == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("run_benchmark produces a consistent report") {
  const auto dir = image_dir("basic", 6);
  const ExtractionConfig cfg = bench_config(dir, {"blocks.0.norm", "head"});
  AdapterSpec spec;
  spec.model_path = cfg.model_path;
  ToyVlmAdapter adapter(spec);
  NullSink sink;
  const BenchmarkReport report = run_benchmark(adapter, cfg, sink);
  CHECK(report.n_instances == 6);
  CHECK(report.model_name == "toy/bench");
  CHECK(report.precision_label == "float32");
  CHECK(report.total_inference_s > 0.0);
  CHECK(report.peak_memory_mb >= 0.0);
  // invariant: per_instance * n = total within 1e-9 relative
  CHECK(std::abs(report.per_instance_s * report.n_instances - report.total_inference_s) <=
        1e-9 * report.total_inference_s);
  // warm-up is not persisted: 6 instances x 2 layers
  CHECK(sink.n == 12);
}

TEST_CASE("a slow store write shows up in the timed span") {
  const auto dir = image_dir("slowstore", 10);
  const ExtractionConfig cfg = bench_config(dir, {"head"});
  AdapterSpec spec;
  spec.model_path = cfg.model_path;
  ToyVlmAdapter adapter(spec);

  NullSink fast;
  const double base = run_benchmark(adapter, cfg, fast).total_inference_s;

  SpinDelaySink slow(std::chrono::microseconds(5000));
  const double delayed = run_benchmark(adapter, cfg, slow).total_inference_s;

  const double expected_extra = 10 * 0.005;
  CHECK(delayed - base >= 0.9 * expected_extra);
}

TEST_CASE("model loading stays outside the timed span") {
  const auto dir = image_dir("loader", 10);
  const ExtractionConfig cfg = bench_config(dir, {"blob"}, "test");

  // near-zero forward cost plus a steady per-record spin delay makes the
  // timed span deterministic
  BigTensorAdapter fast_loaded(1);
  SpinDelaySink sink1(std::chrono::microseconds(20000));
  const double t1 = run_benchmark(fast_loaded, cfg, sink1).total_inference_s;

  // "slow loader": construct, then burn half a second before benchmarking
  BigTensorAdapter slow_loaded(1);
  const auto end = std::chrono::steady_clock::now() + std::chrono::milliseconds(500);
  while (std::chrono::steady_clock::now() < end) {
  }
  SpinDelaySink sink2(std::chrono::microseconds(20000));
  const double t2 = run_benchmark(slow_loaded, cfg, sink2).total_inference_s;

  CHECK(std::abs(t1 - t2) <= 0.05 * std::max(t1, t2));
}

TEST_CASE("two consecutive runs agree within 25 percent") {
  const auto dir = image_dir("stability", 8);
  const ExtractionConfig cfg = bench_config(dir, {"head"});
  AdapterSpec spec;
  spec.model_path = cfg.model_path;
  ToyVlmAdapter adapter(spec);
  SpinDelaySink s1(std::chrono::microseconds(10000));
  SpinDelaySink s2(std::chrono::microseconds(10000));
  const double t1 = run_benchmark(adapter, cfg, s1).total_inference_s;
  const double t2 = run_benchmark(adapter, cfg, s2).total_inference_s;
  CHECK(std::abs(t1 - t2) <= 0.25 * std::max(t1, t2));
}

TEST_CASE("peak memory never shrinks when captures grow") {
  const auto dir = image_dir("memory", 2);
  const ExtractionConfig cfg = bench_config(dir, {"blob"}, "test");

  BigTensorAdapter small(1 << 20);  // 4 MB tensors
  NullSink sink1;
  const double peak_small = run_benchmark(small, cfg, sink1).peak_memory_mb;

  BigTensorAdapter big(48 << 20);  // 192 MB tensors
  NullSink sink2;
  const double peak_big = run_benchmark(big, cfg, sink2).peak_memory_mb;

  CHECK(peak_big >= peak_small);
  CHECK(peak_big >= 100.0);  // the big capture must dominate prior high water
}

TEST_CASE("report table renders the reference row shape") {
  BenchmarkReport report;
  report.model_name = "CLIP";
  report.param_count = 150000000;
  report.n_instances = 5400;
  report.precision_label = "float32";
  report.peak_memory_mb = 616.69;
  report.total_inference_s = 135.0;
  report.per_instance_s = 0.025;
  const std::string table = format_report_table(report);
  CHECK(table.find("CLIP") != std::string::npos);
  CHECK(table.find("150M") != std::string::npos);
  CHECK(table.find("float32") != std::string::npos);
  CHECK(table.find("616.69") != std::string::npos);
  CHECK(table.find("135") != std::string::npos);
  CHECK(table.find("0.025") != std::string::npos);
  // column order: Model, # Params, Precision, Peak Mem, Inference, Per-Instance
  const std::string header = table.substr(0, table.find('\n'));
  CHECK(header.find("Model") < header.find("# Params"));
  CHECK(header.find("# Params") < header.find("Precision"));
  CHECK(header.find("Precision") < header.find("Peak Mem"));
  CHECK(header.find("Peak Mem") < header.find("Inference Time"));
  CHECK(header.find("Inference Time") < header.find("Per-Instance"));
}

TEST_CASE("parameter counts format compactly") {
  CHECK(format_param_count(150000000) == "150M");
  CHECK(format_param_count(2700000000ull) == "2.7B");
  CHECK(format_param_count(7000000000ull) == "7.0B");
  CHECK(format_param_count(616) == "616");
  CHECK(format_param_count(23000) == "23K");
}

TEST_CASE("report JSON carries every field plus the seed") {
  const auto path = std::filesystem::temp_directory_path() / "tlens_bench" / "r.json";
  BenchmarkReport report;
  report.model_name = "toy/x";
  report.param_count = 10;
  report.n_instances = 4;
  report.precision_label = "float32";
  report.peak_memory_mb = 1.5;
  report.total_inference_s = 0.4;
  report.per_instance_s = 0.1;
  write_report_json(path, report, 321);
  const auto bytes = read_file_bytes(path);
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.find("\"seed\": 321") != std::string::npos);
  CHECK(text.find("\"model\": \"toy/x\"") != std::string::npos);
  CHECK(text.find("per_instance_s") != std::string::npos);
}
