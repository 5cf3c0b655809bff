// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tlens/adapter.hpp"
#include "tlens/config.hpp"
#include "tlens/store.hpp"
#include "tlens/tensor.hpp"

namespace tlens {

// One firing of one intercepted layer.
struct Capture {
  std::string layer;
  int firing_index = 0;
  Tensor tensor;
};
using CaptureSet = std::vector<Capture>;

struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact full-string matching of requested layer names against the model's
// available names. Unmatched names raise an error that lists the closest
// available names by edit distance.
std::map<std::string, std::string> match_layers(
    const std::vector<std::string>& requested,
    const std::vector<std::string>& available);

std::size_t edit_distance(const std::string& a, const std::string& b);

// Runs one forward pass with interception callbacks on the given layers.
// Callbacks are registered on entry and deregistered before returning on
// every path, including when forward throws.
CaptureSet extract_one(ModelAdapter& adapter, const ModelInput& input,
                       const std::vector<std::string>& layer_names);

// Map from image_path (or bare filename) to label.
using LabelMap = std::map<std::string, std::string>;

// Full run: every image in the config's input directory (lexicographic
// order) x every matched layer x every firing becomes one stored record.
// Returns the number of records written.
std::int64_t run_extraction(const ExtractionConfig& cfg, ModelAdapter& adapter,
                            RecordSink& sink, const LabelMap* labels = nullptr);

// PNG/JPEG files directly inside `dir`, sorted by filename. With
// `recursive` (config extra `recursive: true`) the whole tree is walked and
// files sort by relative path.
std::vector<std::filesystem::path> list_input_images(
    const std::filesystem::path& dir, bool recursive = false);

}  // namespace tlens
