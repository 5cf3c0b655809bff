// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tlens {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (y * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (y * width + x);
  }
};

bool looks_like_png(const std::vector<std::uint8_t>& bytes);
bool looks_like_jpeg(const std::vector<std::uint8_t>& bytes);

// Decodes PNG or JPEG bytes into RGB. Throws on empty or undecodable input.
Image decode_image(const std::vector<std::uint8_t>& bytes);
Image decode_image_file(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const std::filesystem::path& path, const Image& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace tlens
