// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tlens/csvio.hpp"
#include "tlens/image.hpp"
#include "tlens/rng.hpp"

namespace tlens {
namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

const std::vector<std::pair<std::string, Rgb>>& color_table() {
  static const std::vector<std::pair<std::string, Rgb>> table = {
      {"red", {220, 40, 40}},     {"green", {40, 180, 60}},
      {"blue", {40, 80, 220}},    {"yellow", {240, 220, 40}},
      {"purple", {150, 60, 200}}, {"orange", {245, 140, 30}},
      {"black", {25, 25, 25}},    {"white", {240, 240, 240}},
  };
  return table;
}

Rgb color_by_name(const std::string& name) {
  for (const auto& [n, c] : color_table()) {
    if (n == name) return c;
  }
  return {128, 128, 128};
}

// 5x7 uppercase glyphs, 5 LSBs per row
const std::uint8_t* glyph(char c) {
  static const std::uint8_t font[26][7] = {
      {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // A
      {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // B
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // C
      {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E},  // D
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // E
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // F
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // G
      {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // H
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // I
      {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // J
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
      {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // L
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
      {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // N
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // O
      {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // P
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // Q
      {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // R
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // S
      {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // U
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // V
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // W
      {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // X
      {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04},  // Y
      {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // Z
  };
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  if (c < 'A' || c > 'Z') return nullptr;
  return font[c - 'A'];
}

Image make_canvas(int w, int h, Rgb color, Rng& rng, int noise) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    auto apply = [&](std::uint8_t base) {
      int v = base + (noise > 0 ? rng.uniform_int(-noise, noise) : 0);
      return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    };
    img.rgb[i] = apply(color.r);
    img.rgb[i + 1] = apply(color.g);
    img.rgb[i + 2] = apply(color.b);
  }
  return img;
}

void put_pixel(Image& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.pixel(x, y);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

enum class Fill { kSolid, kStriped, kDotted };

bool fill_hit(Fill f, int x, int y) {
  switch (f) {
    case Fill::kStriped: return ((x + y) / 3) % 2 == 0;
    case Fill::kDotted: return (x % 4 < 2) && (y % 4 < 2);
    default: return true;
  }
}

void draw_circle(Image& img, int cx, int cy, int r, Rgb c, Fill f = Fill::kSolid) {
  for (int y = cy - r; y <= cy + r; ++y) {
    for (int x = cx - r; x <= cx + r; ++x) {
      const int dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r && fill_hit(f, x, y)) put_pixel(img, x, y, c);
    }
  }
}

void draw_square(Image& img, int cx, int cy, int half, Rgb c, Fill f = Fill::kSolid) {
  for (int y = cy - half; y <= cy + half; ++y) {
    for (int x = cx - half; x <= cx + half; ++x) {
      if (fill_hit(f, x, y)) put_pixel(img, x, y, c);
    }
  }
}

void draw_triangle(Image& img, int cx, int cy, int half, Rgb c, Fill f = Fill::kSolid) {
  for (int y = 0; y <= 2 * half; ++y) {
    const int w = (y * half) / (2 * half);
    for (int x = cx - w; x <= cx + w; ++x) {
      if (fill_hit(f, x, y)) put_pixel(img, x, cy - half + y, c);
    }
  }
}

void draw_text(Image& img, const std::string& text, int ox, int oy, int scale, Rgb c) {
  int pen = ox;
  for (char ch : text) {
    const std::uint8_t* g = glyph(ch);
    if (g != nullptr) {
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (g[row] & (1 << (4 - col))) {
            for (int sy = 0; sy < scale; ++sy) {
              for (int sx = 0; sx < scale; ++sx) {
                put_pixel(img, pen + col * scale + sx, oy + row * scale + sy, c);
              }
            }
          }
        }
      }
    }
    pen += 6 * scale;  // 5 columns + 1 space
  }
}

}  // namespace

std::vector<std::string> datagen_color_names() {
  std::vector<std::string> names;
  for (const auto& [n, c] : color_table()) names.push_back(n);
  return names;
}

void generate_probe_dataset(const std::filesystem::path& out_dir, int per_class,
                            std::uint64_t seed, const std::string& prompt) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  Rng rng(Rng::derive(seed, "probe-dataset"));

  CsvTable labels;
  labels.header = {"image_path", "prompt", "split", "label"};
  const Rgb gray = {128, 128, 128};
  int counter = 0;

  auto emit = [&](const std::string& split, const std::string& label, const Image& img) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04d.png", split.c_str(), counter++);
    const std::string rel = std::string("images/") + name;
    write_png(out_dir / rel, img);
    labels.rows.push_back({rel, prompt, split, label});
  };

  const std::vector<std::string> colors = {"red", "green", "blue", "yellow", "purple",
                                           "orange"};
  for (int i = 0; i < per_class; ++i) {
    for (const std::string& color : colors) {
      emit("color", color, make_canvas(64, 64, color_by_name(color), rng, 10));
    }
    for (const std::string shape : {"circle", "square", "triangle"}) {
      Image img = make_canvas(64, 64, gray, rng, 6);
      const Rgb c = color_by_name(colors[static_cast<std::size_t>(rng.uniform_int(0, 5))]);
      if (shape == "circle") draw_circle(img, 32, 32, 18, c);
      if (shape == "square") draw_square(img, 32, 32, 16, c);
      if (shape == "triangle") draw_triangle(img, 32, 32, 18, c);
      emit("shape", shape, img);
    }
    for (const std::string size : {"small", "large"}) {
      Image img = make_canvas(64, 64, gray, rng, 6);
      draw_circle(img, 32, 32, size == "small" ? 7 : 24,
                  color_by_name(colors[static_cast<std::size_t>(rng.uniform_int(0, 5))]));
      emit("size", size, img);
    }
    for (int count = 1; count <= 4; ++count) {
      Image img = make_canvas(64, 64, gray, rng, 6);
      static const int cx[4] = {18, 46, 18, 46};
      static const int cy[4] = {18, 18, 46, 46};
      for (int k = 0; k < count; ++k) {
        draw_square(img, cx[k], cy[k], 9,
                    color_by_name(colors[static_cast<std::size_t>(rng.uniform_int(0, 5))]));
      }
      emit("number", std::to_string(count), img);
    }
    {
      const std::vector<std::pair<std::string, Fill>> mats = {
          {"solid", Fill::kSolid}, {"striped", Fill::kStriped}, {"dotted", Fill::kDotted}};
      for (const auto& [label, fill] : mats) {
        Image img = make_canvas(64, 64, gray, rng, 6);
        draw_square(img, 32, 32, 20,
                    color_by_name(colors[static_cast<std::size_t>(rng.uniform_int(0, 5))]),
                    fill);
        emit("material", label, img);
      }
    }
    for (const std::string answer : {"yes", "no"}) {
      Image img = make_canvas(64, 64, gray, rng, 6);
      if (answer == "yes") {
        draw_circle(img, 32, 32, 14,
                    color_by_name(colors[static_cast<std::size_t>(rng.uniform_int(0, 5))]));
      }
      emit("boolean", answer, img);
    }
  }
  write_csv(out_dir / "labels.csv", labels);
}

void generate_stroop_dataset(const std::filesystem::path& out_dir, int n_items,
                             std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  Rng rng(Rng::derive(seed, "stroop-dataset"));
  const auto names = datagen_color_names();

  CsvTable items;
  items.header = {"image_path", "lexical", "font", "background"};
  for (int i = 0; i < n_items; ++i) {
    // three pairwise-distinct cues
    std::vector<std::size_t> pick(names.size());
    for (std::size_t j = 0; j < pick.size(); ++j) pick[j] = j;
    rng.shuffle(pick);
    const std::string lexical = names[pick[0]];
    const std::string font = names[pick[1]];
    const std::string background = names[pick[2]];

    Image img = make_canvas(96, 64, color_by_name(background), rng, 4);
    std::string word = lexical;
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    const int scale = 2;
    const int text_w = static_cast<int>(word.size()) * 6 * scale;
    draw_text(img, word, (img.width - text_w) / 2, (img.height - 7 * scale) / 2, scale,
              color_by_name(font));

    char name[64];
    std::snprintf(name, sizeof(name), "stroop_%04d.png", i);
    const std::string rel = std::string("images/") + name;
    write_png(out_dir / rel, img);
    items.rows.push_back({rel, lexical, font, background});
  }
  write_csv(out_dir / "items.csv", items);
}

void generate_prototypes(const std::filesystem::path& out_dir, int per_concept,
                         std::uint64_t seed) {
  namespace fs = std::filesystem;
  Rng rng(Rng::derive(seed, "prototypes"));
  for (const std::string& name : datagen_color_names()) {
    fs::create_directories(out_dir / name);
    for (int k = 0; k < per_concept; ++k) {
      Image img = make_canvas(64, 64, color_by_name(name), rng, 12);
      char file[64];
      std::snprintf(file, sizeof(file), "%s_%02d.png", name.c_str(), k);
      write_png(out_dir / name / file, img);
    }
  }
}

}  // namespace tlens
