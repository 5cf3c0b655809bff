// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/linear_oracle.hpp"

#include <stdexcept>

#include "tlens/image.hpp"
#include "tlens/kernels.hpp"
#include "tlens/rng.hpp"

namespace tlens {

LinearOracleAdapter::LinearOracleAdapter(const AdapterSpec& spec) {
  identity_ = {spec.model_path, "linear-probe-oracle"};
  for (const auto& [key, value] : spec.options) {
    if (key == "out_dim") {
      out_dim_ = std::stoi(value);
      if (out_dim_ <= 0) throw std::runtime_error("linear-probe-oracle: out_dim must be positive");
    } else if (key == "seed") {
      seed_ = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "dtype" || key == "torch_dtype") {
      if (value != "auto" && value != "float32") {
        throw std::runtime_error("linear-probe-oracle: unsupported dtype '" + value + "'");
      }
    } else {
      throw std::runtime_error("linear-probe-oracle: unknown model option '" + key + "'");
    }
  }
  const std::size_t total = static_cast<std::size_t>(out_dim_) * kInDim + out_dim_;
  const std::string cache_key = "linear-probe-oracle_" + spec.model_path + "_o" +
                                std::to_string(out_dim_) + "_s" + std::to_string(seed_);
  std::vector<float> flat = cached_weights(spec.cache_dir, cache_key, total, [&] {
    Rng rng(Rng::derive(seed_, "linear-probe-oracle/" + spec.model_path));
    std::vector<float> w(total);
    for (float& v : w) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return w;
  });
  weight_.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(out_dim_) * kInDim);
  bias_.assign(flat.begin() + static_cast<std::ptrdiff_t>(out_dim_) * kInDim, flat.end());
}

std::string LinearOracleAdapter::probe_layer_name(int index) const {
  if (index != 1) throw std::invalid_argument("linear-probe-oracle: only layer 1 exists");
  return "linear";
}

std::vector<float> LinearOracleAdapter::featurize(
    const std::vector<std::uint8_t>& image_bytes, const std::string& prompt) {
  const Image img = decode_image(image_bytes);
  std::vector<float> x(kInDim, 0.0f);

  double sums[3] = {0.0, 0.0, 0.0};
  const std::size_t n_px = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n_px; ++i) {
    sums[0] += img.rgb[3 * i + 0];
    sums[1] += img.rgb[3 * i + 1];
    sums[2] += img.rgb[3 * i + 2];
  }
  for (int c = 0; c < 3; ++c) {
    x[c] = n_px ? static_cast<float>(sums[c] / (255.0 * static_cast<double>(n_px))) : 0.0f;
  }
  x[3] = img.width / 128.0f;
  x[4] = img.height / 128.0f;
  for (unsigned char c : prompt) x[5 + (c % 16)] += 1.0f;
  if (!prompt.empty()) {
    for (int i = 5; i < 21; ++i) x[i] /= static_cast<float>(prompt.size());
  }
  x[21] = prompt.size() / 64.0f;
  x[22] = 1.0f;
  x[23] = (x[0] + x[1] + x[2]) / 3.0f;
  return x;
}

ModelInput LinearOracleAdapter::preprocess(const std::vector<std::uint8_t>& image_bytes,
                                           const std::string& image_path,
                                           const std::string& prompt) const {
  if (prompt.empty()) {
    throw std::runtime_error("linear-probe-oracle: prompt must be non-empty");
  }
  ModelInput input;
  input.image_path = image_path;
  input.prompt = prompt;
  input.patches = Tensor({1, kInDim}, featurize(image_bytes, prompt));
  return input;
}

Tensor LinearOracleAdapter::forward(const ModelInput& input) {
  if (input.patches.numel() != kInDim) {
    throw std::runtime_error("linear-probe-oracle: input feature size mismatch");
  }
  const float* x = input.patches.data.data();
  Tensor y = Tensor::zeros({out_dim_});
  for (int j = 0; j < out_dim_; ++j) {
    y.data[j] = kernels::dot_f32(&weight_[static_cast<std::size_t>(j) * kInDim], x, kInDim) +
                bias_[j];
  }
  hooks_.fire("linear", y);
  return y;
}

std::uint64_t LinearOracleAdapter::param_count() const {
  return static_cast<std::uint64_t>(out_dim_) * kInDim + out_dim_;
}

}  // namespace tlens
