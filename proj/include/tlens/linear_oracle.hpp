// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlens/adapter.hpp"

namespace tlens {

// Single linear map with closed-form layer output: the captured tensor for
// layer "linear" is exactly y[j] = dot(weight row j, x) + bias[j], evaluated
// with the same kernels the forward pass uses. Tests recompute it directly.
//
// Options (unknown keys are an error): out_dim, seed, dtype|torch_dtype.
class LinearOracleAdapter : public ModelAdapter {
 public:
  explicit LinearOracleAdapter(const AdapterSpec& spec);

  const ModelIdentity& identity() const override { return identity_; }
  std::vector<std::string> named_layers() const override { return {"linear"}; }
  int layer_count() const override { return 1; }
  std::string probe_layer_name(int index) const override;
  ModelInput preprocess(const std::vector<std::uint8_t>& image_bytes,
                        const std::string& image_path,
                        const std::string& prompt) const override;
  Tensor forward(const ModelInput& input) override;
  std::uint64_t param_count() const override;

  static constexpr int kInDim = 24;
  int out_dim() const { return out_dim_; }
  // row-major out_dim x kInDim
  const std::vector<float>& weight() const { return weight_; }
  const std::vector<float>& bias() const { return bias_; }

  // Deterministic image+prompt featurization: channel means, geometry, and a
  // 16-bucket prompt byte histogram.
  static std::vector<float> featurize(const std::vector<std::uint8_t>& image_bytes,
                                      const std::string& prompt);

 private:
  ModelIdentity identity_;
  int out_dim_ = 8;
  std::uint64_t seed_ = 0;
  std::vector<float> weight_;
  std::vector<float> bias_;
};

}  // namespace tlens
