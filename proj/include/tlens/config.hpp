// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tlens {

// A fully parsed run description. Everything the pipeline needs comes from
// here; nothing downstream hard-codes run parameters.
//
// File format (YAML):
//   architecture: <adapter family>
//   model_path:   <checkpoint identifier or path>
//   model:                      # optional, ordered list of single-key maps
//     - dtype: auto
//   output_db:    <store path>
//   input_dir:    <image directory>
//   prompt:       "<text applied to every image>"
//   modules:
//     - <fully.qualified.layer>
//
// Unrecognized top-level keys are preserved verbatim in `extras`.
struct ExtractionConfig {
  std::string architecture;
  std::string model_path;
  // ordered key/value pairs forwarded verbatim to the adapter
  std::vector<std::pair<std::string, std::string>> model_options;
  std::string output_db;  // as written in the file
  std::string input_dir;  // as written in the file
  std::string prompt;
  std::vector<std::string> modules;
  // unrecognized keys -> YAML-rendered values, never dropped
  std::map<std::string, std::string> extras;

  // directory of the source file; relative paths resolve against it
  std::filesystem::path base_dir;

  std::filesystem::path resolved_output_db() const;
  std::filesystem::path resolved_input_dir() const;

  bool extra_flag(const std::string& key) const;  // "true"/"1"/"yes"
  bool allow_nonfinite() const { return extra_flag("allow_nonfinite"); }

  friend bool operator==(const ExtractionConfig& a, const ExtractionConfig& b) {
    return a.architecture == b.architecture && a.model_path == b.model_path &&
           a.model_options == b.model_options && a.output_db == b.output_db &&
           a.input_dir == b.input_dir && a.prompt == b.prompt &&
           a.modules == b.modules && a.extras == b.extras;
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExtractionConfig parse_config(const std::filesystem::path& path);
ExtractionConfig parse_config_string(const std::string& text,
                                     const std::filesystem::path& base_dir = {});
std::string serialize_config(const ExtractionConfig& cfg);

}  // namespace tlens
