// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tlens/adapter.hpp"
#include "tlens/config.hpp"
#include "tlens/store.hpp"

namespace tlens {

struct BenchmarkReport {
  std::string model_name;
  std::uint64_t param_count = 0;
  std::int64_t n_instances = 0;
  std::string precision_label;
  double peak_memory_mb = 0.0;
  double total_inference_s = 0.0;
  double per_instance_s = 0.0;  // always total / n
};

struct BenchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Times forward passes plus store writes over the config's input directory.
// Preprocessing happens up front; adapter loading is the caller's problem and
// is never inside the timed span. One warm-up forward (the first instance,
// not persisted) precedes the timer. Peak memory is the process RSS
// high-water delta over the timed span.
BenchmarkReport run_benchmark(ModelAdapter& adapter, const ExtractionConfig& cfg,
                              RecordSink& sink);

// Current process peak resident set size, in bytes.
std::uint64_t peak_rss_bytes();

std::string format_report_table(const BenchmarkReport& report);
std::string format_param_count(std::uint64_t params);
void write_report_json(const std::filesystem::path& path,
                       const BenchmarkReport& report, std::uint64_t seed);

}  // namespace tlens
