// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tlens/store.hpp"

namespace tlens {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major double matrix for the geometry analyses.
struct MatrixD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  MatrixD() = default;
  MatrixD(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// PCA of a set of embeddings. Components come from a one-sided Jacobi SVD of
// the centered data matrix; they are stored as rows (component j = row j),
// ordered by decreasing singular value.
struct PCAModel {
  std::vector<double> mean;      // d
  MatrixD components;            // d x d, row j = j-th principal direction
  std::vector<double> spectrum;  // singular values of the centered matrix
  std::size_t sample_count = 0;

  std::size_t dim() const { return mean.size(); }
  std::size_t component_count() const { return components.rows; }
  // number of directions with non-negligible variance
  std::size_t rank() const;
  // spectrum[i]^2 / (n - 1)
  std::vector<double> explained_variances() const;
};

PCAModel fit_pca(const MatrixD& embeddings);

// (x - mean) projected onto the first d_prime components.
std::vector<double> project(const std::vector<double>& x, const PCAModel& model,
                            std::size_t d_prime);

// Mean cosine similarity between x and each prototype vector.
double avg_cosine(const std::vector<double>& x,
                  const std::vector<std::vector<double>>& prototypes);

// concept -> reference vectors (uniform dimensionality)
using PrototypeSet = std::map<std::string, std::vector<std::vector<double>>>;

struct StroopItem {
  std::string image_path;
  std::string lexical;
  std::string font;
  std::string background;
  std::map<std::string, std::vector<double>> embedding_by_layer;
};

enum class Aspect { kLexical, kFont, kBackground };
const char* aspect_label(Aspect a);
inline constexpr Aspect kAllAspects[] = {Aspect::kLexical, Aspect::kFont,
                                         Aspect::kBackground};

struct SurfaceCell {
  Aspect aspect;
  std::string layer;
  std::size_t d_prime = 0;
  double matched = 0.0;
  double mismatched = 0.0;
};

// Per aspect, layer, and retained-component count: the mean cosine between
// each item and its own concept's prototypes (matched) and the mean over all
// other concepts' prototypes (mismatched), in the projected space. PCA is
// fit per layer on the prototype embeddings only.
std::vector<SurfaceCell> stroop_surfaces(
    const std::vector<StroopItem>& items,
    const std::map<std::string, PrototypeSet>& prototypes_by_layer,
    const std::vector<std::string>& layers, const std::vector<std::size_t>& d_sweep);

// Geometric sweep 1, 2, 4, ... capped at rank.
std::vector<std::size_t> default_d_sweep(std::size_t rank);

struct StroopItemRow {
  std::string image_path;
  std::string lexical;
  std::string font;
  std::string background;
};
std::vector<StroopItemRow> read_items_csv(const std::filesystem::path& path);

// Assembles items and per-layer prototype sets from stored activations.
// Prototype records are the ones whose image_path sits under
// prototype_root/<concept>/...; duplicate prototype files (by content hash)
// are ingested once.
struct StroopInputs {
  std::vector<StroopItem> items;
  std::map<std::string, PrototypeSet> prototypes_by_layer;
  std::vector<std::string> layers;
};
StroopInputs load_stroop_inputs(const ActivationStore& store,
                                const std::vector<StroopItemRow>& item_rows,
                                const std::filesystem::path& prototype_root);

void write_surfaces_csv(const std::filesystem::path& path,
                        const std::vector<SurfaceCell>& cells, std::uint64_t seed);
std::vector<SurfaceCell> read_surfaces_csv(const std::filesystem::path& path);

}  // namespace tlens
