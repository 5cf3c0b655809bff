// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tlens/geometry.hpp"
#include "tlens/probing.hpp"

namespace tlens {

// Static vector graphics for the two built-in analyses. Output is a pure
// function of the inputs and the style seed: fixed float formatting, no
// timestamps, so identical inputs give byte-identical files.

// Grouped bars per (split, layer): main vs. control accuracy, significance
// stars above the main bar.
std::string probe_bars_svg(const std::vector<ProbeResult>& results,
                           std::uint64_t style_seed);

// Three panels (lexical, font, background), matched and mismatched cosine
// surfaces over layer x retained components, drawn in a fixed isometric
// projection.
std::string concept_surfaces_svg(const std::vector<SurfaceCell>& cells,
                                 std::uint64_t style_seed);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace tlens
