// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/bench.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <sys/resource.h>

#include <nlohmann/json.hpp>

#include "tlens/extraction.hpp"
#include "tlens/image.hpp"

namespace tlens {

std::uint64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  // ru_maxrss is KiB on Linux
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024ull;
}

BenchmarkReport run_benchmark(ModelAdapter& adapter, const ExtractionConfig& cfg,
                              RecordSink& sink) {
  const auto mapping = match_layers(cfg.modules, adapter.named_layers());
  std::vector<std::string> layers;
  for (const std::string& m : cfg.modules) layers.push_back(mapping.at(m));

  const auto images = list_input_images(cfg.resolved_input_dir());
  if (images.empty()) {
    throw BenchError("bench: empty dataset in " + cfg.resolved_input_dir().string());
  }

  // preprocessing stays outside the timed span
  std::vector<ModelInput> inputs;
  inputs.reserve(images.size());
  for (const auto& path : images) {
    inputs.push_back(adapter.preprocess(read_file_bytes(path), path.string(), cfg.prompt));
  }

  // memory baseline precedes the warm-up so its allocations count toward the
  // peak; the timer starts after it
  const std::uint64_t rss_before = peak_rss_bytes();
  extract_one(adapter, inputs.front(), layers);

  const bool allow_nonfinite = cfg.allow_nonfinite();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const CaptureSet captures = extract_one(adapter, inputs[i], layers);
    for (const Capture& c : captures) {
      sink.insert(make_record(cfg.model_path, cfg.architecture, inputs[i].image_path,
                              cfg.prompt, std::nullopt, c.layer, c.tensor,
                              allow_nonfinite, adapter.precision_label()));
    }
  }
  sink.flush();
  const auto t1 = std::chrono::steady_clock::now();
  const std::uint64_t rss_after = peak_rss_bytes();

  BenchmarkReport report;
  report.model_name = adapter.identity().name;
  report.param_count = adapter.param_count();
  report.n_instances = static_cast<std::int64_t>(inputs.size());
  report.precision_label = adapter.precision_label();
  report.total_inference_s = std::chrono::duration<double>(t1 - t0).count();
  report.per_instance_s = report.total_inference_s / static_cast<double>(report.n_instances);
  report.peak_memory_mb =
      static_cast<double>(rss_after >= rss_before ? rss_after - rss_before : 0) /
      (1024.0 * 1024.0);
  return report;
}

std::string format_param_count(std::uint64_t params) {
  char buf[32];
  if (params >= 1000000000ull) {
    const double b = static_cast<double>(params) / 1e9;
    std::snprintf(buf, sizeof(buf), b >= 10 ? "%.0fB" : "%.1fB", b);
  } else if (params >= 1000000ull) {
    std::snprintf(buf, sizeof(buf), "%.0fM", static_cast<double>(params) / 1e6);
  } else if (params >= 1000ull) {
    std::snprintf(buf, sizeof(buf), "%.0fK", static_cast<double>(params) / 1e3);
  } else {
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(params));
  }
  return buf;
}

std::string format_report_table(const BenchmarkReport& report) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-24s %10s %10s %14s %20s %20s\n", "Model",
                "# Params", "Precision", "Peak Mem (MB)", "Inference Time (s)",
                "Per-Instance Time (s)");
  out += line;
  std::snprintf(line, sizeof(line), "%-24s %10s %10s %14.2f %20.6g %20.6g\n",
                report.model_name.c_str(), format_param_count(report.param_count).c_str(),
                report.precision_label.c_str(), report.peak_memory_mb,
                report.total_inference_s, report.per_instance_s);
  out += line;
  return out;
}

void write_report_json(const std::filesystem::path& path, const BenchmarkReport& report,
                       std::uint64_t seed) {
  nlohmann::json j = {
      {"model", report.model_name},
      {"param_count", report.param_count},
      {"n_instances", report.n_instances},
      {"precision", report.precision_label},
      {"peak_memory_mb", report.peak_memory_mb},
      {"total_inference_s", report.total_inference_s},
      {"per_instance_s", report.per_instance_s},
      {"seed", seed},
  };
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw BenchError("bench: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace tlens
