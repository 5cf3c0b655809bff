// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tlens {

// Desk-scale synthetic data: attribute-labelled images for probing, Stroop
// items with deliberately incongruent color cues, and per-concept prototype
// images. Everything is seeded and reproducible.

std::vector<std::string> datagen_color_names();  // the 8 concept colors

// Writes images/ plus labels.csv (image_path,prompt,split,label) covering the
// six attribute splits: boolean, color, material, number, shape, size.
void generate_probe_dataset(const std::filesystem::path& out_dir, int per_class,
                            std::uint64_t seed, const std::string& prompt);

// Writes images/ plus items.csv (image_path,lexical,font,background); the
// three cues of every item are pairwise distinct.
void generate_stroop_dataset(const std::filesystem::path& out_dir, int n_items,
                             std::uint64_t seed);

// Writes <out_dir>/<concept>/<concept>_<k>.png for every concept color.
void generate_prototypes(const std::filesystem::path& out_dir, int per_concept,
                         std::uint64_t seed);

}  // namespace tlens
