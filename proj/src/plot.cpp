// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace tlens {
namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void rect(std::string& svg, double x, double y, double w, double h,
          const std::string& fill, double opacity = 1.0) {
  svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"";
  if (opacity < 1.0) svg += " fill-opacity=\"" + num(opacity) + "\"";
  svg += "/>\n";
}

void text(std::string& svg, double x, double y, const std::string& s, int size,
          const std::string& anchor = "middle", double rotate = 0.0) {
  svg += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
         std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
         "\"";
  if (rotate != 0.0) {
    svg += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
  }
  svg += ">" + s + "</text>\n";
}

void line(std::string& svg, double x1, double y1, double x2, double y2,
          const std::string& stroke, double width = 1.0) {
  svg += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
         "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
         num(width) + "\"/>\n";
}

const char* kMainColor = "#e08214";
const char* kControlColor = "#8073ac";
const char* kMatchedColor = "#e08214";
const char* kMismatchedColor = "#4393c3";

}  // namespace

std::string probe_bars_svg(const std::vector<ProbeResult>& results,
                           std::uint64_t style_seed) {
  const double bar_w = 16.0;
  const double group_w = 2 * bar_w + 18.0;
  const double plot_h = 260.0;
  const double margin_l = 54.0;
  const double margin_t = 30.0;
  const double margin_b = 110.0;
  const double width = margin_l + group_w * std::max<std::size_t>(results.size(), 1) + 30.0;
  const double height = margin_t + plot_h + margin_b;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\">\n";
  svg += "<!-- style_seed=" + std::to_string(style_seed) + " -->\n";
  rect(svg, 0, 0, width, height, "#ffffff");

  // y axis: accuracy 0..1
  for (int tick = 0; tick <= 10; tick += 2) {
    const double frac = tick / 10.0;
    const double y = margin_t + plot_h * (1.0 - frac);
    line(svg, margin_l - 4, y, width - 20, y, tick == 0 ? "#333333" : "#dddddd");
    text(svg, margin_l - 8, y + 4, num(frac), 11, "end");
  }
  text(svg, 16, margin_t + plot_h / 2, "accuracy", 12, "middle", -90);

  double x = margin_l + 8;
  for (const ProbeResult& r : results) {
    const double main_h = plot_h * r.main_accuracy;
    const double ctrl_h = plot_h * r.control_accuracy;
    rect(svg, x, margin_t + plot_h - main_h, bar_w, main_h, kMainColor);
    rect(svg, x + bar_w + 3, margin_t + plot_h - ctrl_h, bar_w, ctrl_h, kControlColor);
    if (r.stars != Stars::kNone) {
      text(svg, x + bar_w / 2, margin_t + plot_h - main_h - 6, stars_label(r.stars), 12);
    }
    text(svg, x + bar_w + 1, margin_t + plot_h + 14, r.split + " / " + r.layer, 10,
         "end", -45);
    x += group_w;
  }

  // legend
  rect(svg, margin_l, height - 28, 12, 12, kMainColor);
  text(svg, margin_l + 18, height - 18, "main", 11, "start");
  rect(svg, margin_l + 70, height - 28, 12, 12, kControlColor);
  text(svg, margin_l + 88, height - 18, "control", 11, "start");

  svg += "</svg>\n";
  return svg;
}

std::string concept_surfaces_svg(const std::vector<SurfaceCell>& cells,
                                 std::uint64_t style_seed) {
  // collect axes
  std::vector<std::string> layers;
  std::vector<std::size_t> dprimes;
  {
    std::set<std::string> lseen;
    std::set<std::size_t> dseen;
    for (const SurfaceCell& c : cells) {
      if (lseen.insert(c.layer).second) layers.push_back(c.layer);
      dseen.insert(c.d_prime);
    }
    dprimes.assign(dseen.begin(), dseen.end());
  }
  std::map<std::string, std::size_t> layer_idx;
  for (std::size_t i = 0; i < layers.size(); ++i) layer_idx[layers[i]] = i;
  std::map<std::size_t, std::size_t> dp_idx;
  for (std::size_t i = 0; i < dprimes.size(); ++i) dp_idx[dprimes[i]] = i;

  const double panel_w = 300.0;
  const double panel_h = 260.0;
  const double width = panel_w * 3 + 40.0;
  const double height = panel_h + 70.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\">\n";
  svg += "<!-- style_seed=" + std::to_string(style_seed) + " -->\n";
  rect(svg, 0, 0, width, height, "#ffffff");

  // isometric projection of (i=layer, j=d', v=cosine)
  const double nl = std::max<std::size_t>(layers.size(), 2) - 1;
  const double nd = std::max<std::size_t>(dprimes.size(), 2) - 1;
  auto proj = [&](double i, double j, double v, double ox) {
    const double ix = nl > 0 ? i / nl : 0.0;
    const double jy = nd > 0 ? j / nd : 0.0;
    const double px = ox + 60.0 + 140.0 * ix + 70.0 * jy;
    const double py = 60.0 + 60.0 * jy - 30.0 * ix + 90.0 * (1.0 - (v + 1.0) / 2.0);
    return std::pair<double, double>(px, py);
  };

  int panel = 0;
  for (Aspect aspect : kAllAspects) {
    const double ox = 10.0 + panel * panel_w;
    text(svg, ox + panel_w / 2, 20, std::string(aspect_label(aspect)) + " vs. reference",
         13);

    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> grid;
    for (const SurfaceCell& c : cells) {
      if (c.aspect != aspect) continue;
      grid[{layer_idx[c.layer], dp_idx[c.d_prime]}] = {c.matched, c.mismatched};
    }
    // draw cells back-to-front so nearer quads overwrite farther ones
    for (std::size_t pass = 0; pass < 2; ++pass) {
      const bool matched_pass = pass == 1;
      for (std::size_t j = dprimes.size(); j-- > 0;) {
        for (std::size_t i = layers.size(); i-- > 0;) {
          if (i + 1 >= layers.size() || j + 1 >= dprimes.size()) continue;
          auto need = [&](std::size_t a, std::size_t b) {
            auto it = grid.find({a, b});
            if (it == grid.end()) return false;
            return true;
          };
          if (!need(i, j) || !need(i + 1, j) || !need(i, j + 1) || !need(i + 1, j + 1)) {
            continue;
          }
          auto v = [&](std::size_t a, std::size_t b) {
            const auto& mm = grid.at({a, b});
            return matched_pass ? mm.first : mm.second;
          };
          auto [x0, y0] = proj(static_cast<double>(i), static_cast<double>(j), v(i, j), ox);
          auto [x1, y1] =
              proj(static_cast<double>(i + 1), static_cast<double>(j), v(i + 1, j), ox);
          auto [x2, y2] = proj(static_cast<double>(i + 1), static_cast<double>(j + 1),
                               v(i + 1, j + 1), ox);
          auto [x3, y3] =
              proj(static_cast<double>(i), static_cast<double>(j + 1), v(i, j + 1), ox);
          svg += "<polygon points=\"" + num(x0) + "," + num(y0) + " " + num(x1) + "," +
                 num(y1) + " " + num(x2) + "," + num(y2) + " " + num(x3) + "," + num(y3) +
                 "\" fill=\"" + (matched_pass ? kMatchedColor : kMismatchedColor) +
                 "\" fill-opacity=\"0.75\" stroke=\"#555555\" stroke-width=\"0.5\"/>\n";
        }
      }
    }
    text(svg, ox + panel_w / 2 - 30, panel_h + 40, "layer →", 11);
    text(svg, ox + panel_w - 55, panel_h - 10, "components →", 11, "start", -40);
    ++panel;
  }

  // legend
  rect(svg, 20, height - 24, 12, 12, kMatchedColor);
  text(svg, 38, height - 14, "matched", 11, "start");
  rect(svg, 110, height - 24, 12, 12, kMismatchedColor);
  text(svg, 128, height - 14, "mismatched", 11, "start");

  svg += "</svg>\n";
  return svg;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("plot: cannot write " + path.string());
  out << content;
}

}  // namespace tlens
