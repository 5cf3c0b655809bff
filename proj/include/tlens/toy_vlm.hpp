// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlens/adapter.hpp"

namespace tlens {

// Deterministic reference model: patch features and prompt bytes are embedded
// into a d-dimensional stream that runs through N norm/mix/mlp blocks, a
// shared per-channel scale (fires once per block), and a small head.
//
// Named layers, in definition order:
//   embed, blocks.<i>.norm, blocks.<i>.mix, blocks.<i>.mlp, shared.scale, head
//
// Options (unknown keys are an error):
//   blocks, d_model, patch_size, seed, dtype|torch_dtype (auto|float32)
class ToyVlmAdapter : public ModelAdapter {
 public:
  explicit ToyVlmAdapter(const AdapterSpec& spec);

  const ModelIdentity& identity() const override { return identity_; }
  std::vector<std::string> named_layers() const override;
  int layer_count() const override { return blocks_; }
  std::string probe_layer_name(int index) const override;
  ModelInput preprocess(const std::vector<std::uint8_t>& image_bytes,
                        const std::string& image_path,
                        const std::string& prompt) const override;
  Tensor forward(const ModelInput& input) override;
  std::uint64_t param_count() const override;
  std::string precision_label() const override { return "float32"; }

  int d_model() const { return d_model_; }
  int patch_size() const { return patch_size_; }

  // Test support: the next forward throws after `fires` hook firings.
  void arm_forward_failure(int fires = 1) { fail_after_fires_ = fires; }

  static constexpr int kVocab = 16;
  static constexpr std::int64_t kContextBudget = 4096;

 private:
  struct Block {
    std::vector<float> gamma, beta;      // layernorm, d each
    std::vector<float> w_self, w_ctx;    // d x d, row-major
    std::vector<float> w1, b1;           // d x 2d / 2d
    std::vector<float> w2, b2;           // 2d x d / d
  };

  void fire_checked(const std::string& layer, const Tensor& t);

  ModelIdentity identity_;
  int blocks_ = 2;
  int d_model_ = 32;
  int patch_size_ = 4;
  std::uint64_t seed_ = 0;

  std::vector<float> patch_embed_;  // (3*P*P) x d
  std::vector<float> byte_embed_;   // 256 x d
  std::vector<Block> block_params_;
  std::vector<float> shared_scale_;  // d
  std::vector<float> head_w_;        // d x kVocab

  std::optional<int> fail_after_fires_;
  int fires_this_forward_ = 0;
};

}  // namespace tlens
