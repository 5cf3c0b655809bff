// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Test-side synthetic generators. These construct data with known ground
// truth; they are independent of the implementation paths they exercise.

#include <cmath>
#include <string>
#include <vector>

#include "tlens/geometry.hpp"
#include "tlens/probing.hpp"
#include "tlens/rng.hpp"

namespace tlens::testgen {

struct SyntheticStroop {
  std::vector<StroopItem> items;
  std::map<std::string, PrototypeSet> prototypes_by_layer;
  std::vector<std::string> layers;
  std::size_t dim = 0;
};

// Orthogonal-axis concept world: concept k owns coordinate axis e_k of a
// d-dimensional space; prototypes sit at e_k plus small noise.
//
// Items plant signal `g` on the axis of one aspect's color. The other two cue
// axes receive weight g/(K-2): under uniform mismatched aggregation the
// planted axis leaks into the other aspects' mismatched pools with weight
// 1/(K-1), and a cross-cue weight of exactly 1/(K-2) cancels that leak, so
// the constructed ground truth for non-planted aspects is zero net gap.
// With g = 0 items are pure noise (the null generator).
inline SyntheticStroop make_orthogonal_stroop(int n_concepts, int per_concept,
                                              int n_items, std::size_t dim,
                                              double signal, double noise_sigma,
                                              double proto_sigma, Aspect planted,
                                              std::uint64_t seed) {
  SyntheticStroop out;
  out.dim = dim;
  out.layers = {"layer.0"};
  Rng rng(Rng::derive(seed, "orthogonal-stroop"));

  std::vector<std::string> concepts;
  for (int k = 0; k < n_concepts; ++k) concepts.push_back("c" + std::to_string(k));

  PrototypeSet protos;
  for (int k = 0; k < n_concepts; ++k) {
    for (int i = 0; i < per_concept; ++i) {
      std::vector<double> v(dim, 0.0);
      v[static_cast<std::size_t>(k)] = 1.0;
      for (double& x : v) x += proto_sigma * rng.normal();
      protos[concepts[static_cast<std::size_t>(k)]].push_back(std::move(v));
    }
  }
  out.prototypes_by_layer["layer.0"] = std::move(protos);

  const double cross = n_concepts > 2 ? signal / static_cast<double>(n_concepts - 2) : 0.0;
  for (int i = 0; i < n_items; ++i) {
    // three pairwise-distinct cue concepts
    std::vector<int> pick(static_cast<std::size_t>(n_concepts));
    for (int k = 0; k < n_concepts; ++k) pick[static_cast<std::size_t>(k)] = k;
    rng.shuffle(pick);
    StroopItem item;
    item.image_path = "item" + std::to_string(i);
    item.lexical = concepts[static_cast<std::size_t>(pick[0])];
    item.font = concepts[static_cast<std::size_t>(pick[1])];
    item.background = concepts[static_cast<std::size_t>(pick[2])];

    const int planted_axis = planted == Aspect::kLexical ? pick[0]
                             : planted == Aspect::kFont  ? pick[1]
                                                         : pick[2];
    std::vector<double> emb(dim, 0.0);
    for (double& x : emb) x = noise_sigma / std::sqrt(static_cast<double>(dim)) * rng.normal();
    emb[static_cast<std::size_t>(planted_axis)] += signal;
    for (int a = 0; a < 3; ++a) {
      if (pick[static_cast<std::size_t>(a)] == planted_axis) continue;
      emb[static_cast<std::size_t>(pick[static_cast<std::size_t>(a)])] += cross;
    }
    item.embedding_by_layer["layer.0"] = std::move(emb);
    out.items.push_back(std::move(item));
  }
  return out;
}

// c-way task: feature = one-hot(label) + Gaussian noise, dimensionality c.
inline ProbeDataset make_onehot_split(const std::string& name, int n, int c,
                                      double sigma, std::uint64_t seed) {
  ProbeDataset data;
  data.dim = c;
  data.num_classes = c;
  data.split_name = name;
  Rng rng(Rng::derive(seed, "onehot/" + name));
  for (int i = 0; i < n; ++i) {
    const int label = i % c;
    std::vector<float> x(static_cast<std::size_t>(c));
    for (int j = 0; j < c; ++j) {
      x[static_cast<std::size_t>(j)] =
          static_cast<float>((j == label ? 1.0 : 0.0) + sigma * rng.normal());
    }
    data.push_example(x.data(), label);
  }
  return data;
}

// matched shape, but the features never see the label
inline ProbeDataset make_noise_split(const std::string& name, int n, int c, int dim,
                                     std::uint64_t seed) {
  ProbeDataset data;
  data.dim = dim;
  data.num_classes = c;
  data.split_name = name;
  Rng rng(Rng::derive(seed, "noise/" + name));
  for (int i = 0; i < n; ++i) {
    std::vector<float> x(static_cast<std::size_t>(dim));
    for (float& v : x) v = static_cast<float>(rng.normal());
    data.push_example(x.data(), i % c);
  }
  return data;
}

}  // namespace tlens::testgen
