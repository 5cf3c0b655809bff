// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/toy_vlm.hpp"

#include <cmath>
#include <stdexcept>

#include "tlens/image.hpp"
#include "tlens/kernels.hpp"
#include "tlens/rng.hpp"

namespace tlens {
namespace {

int parse_positive_int(const std::string& key, const std::string& value) {
  try {
    const int v = std::stoi(value);
    if (v <= 0) throw std::invalid_argument("nonpositive");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("toy-vlm: option '" + key + "' must be a positive integer, got '" +
                             value + "'");
  }
}

void check_dtype(const std::string& value) {
  if (value != "auto" && value != "float32") {
    throw std::runtime_error("toy-vlm: unsupported dtype '" + value +
                             "' (supported: auto, float32)");
  }
}

}  // namespace

ToyVlmAdapter::ToyVlmAdapter(const AdapterSpec& spec) {
  identity_ = {spec.model_path, "toy-vlm"};
  for (const auto& [key, value] : spec.options) {
    if (key == "blocks") {
      blocks_ = parse_positive_int(key, value);
    } else if (key == "d_model") {
      d_model_ = parse_positive_int(key, value);
    } else if (key == "patch_size") {
      patch_size_ = parse_positive_int(key, value);
    } else if (key == "seed") {
      seed_ = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "dtype" || key == "torch_dtype") {
      check_dtype(value);
    } else {
      throw std::runtime_error("toy-vlm: unknown model option '" + key + "'");
    }
  }

  const int d = d_model_;
  const int pf = 3 * patch_size_ * patch_size_;
  // per block: gamma+beta (2d), w_self+w_ctx (2d^2), w1 (2d^2), b1 (2d),
  // w2 (2d^2), b2 (d)
  const std::size_t per_block = 6u * d * d + 5u * d;
  const std::size_t total = static_cast<std::size_t>(pf) * d + 256u * d +
                            static_cast<std::size_t>(blocks_) * per_block + d +
                            static_cast<std::size_t>(d) * kVocab;

  const std::string cache_key = "toy-vlm_" + spec.model_path + "_b" +
                                std::to_string(blocks_) + "_d" + std::to_string(d) +
                                "_p" + std::to_string(patch_size_) + "_s" +
                                std::to_string(seed_);
  std::vector<float> flat = cached_weights(spec.cache_dir, cache_key, total, [&] {
    Rng rng(Rng::derive(seed_, "toy-vlm/" + spec.model_path));
    std::vector<float> w;
    w.reserve(total);
    auto uniform_block = [&](std::size_t n, float scale) {
      for (std::size_t i = 0; i < n; ++i) {
        w.push_back(static_cast<float>(rng.uniform(-scale, scale)));
      }
    };
    auto const_block = [&](std::size_t n, float v) {
      for (std::size_t i = 0; i < n; ++i) w.push_back(v);
    };
    uniform_block(static_cast<std::size_t>(pf) * d, 1.0f / std::sqrt(static_cast<float>(pf)));
    uniform_block(256u * d, 0.5f);
    const float ws = 1.0f / std::sqrt(static_cast<float>(d));
    for (int b = 0; b < blocks_; ++b) {
      const_block(d, 1.0f);  // gamma
      const_block(d, 0.0f);  // beta
      uniform_block(static_cast<std::size_t>(d) * d, ws);       // w_self
      uniform_block(static_cast<std::size_t>(d) * d, ws);       // w_ctx
      uniform_block(static_cast<std::size_t>(d) * 2 * d, ws);   // w1
      const_block(2u * d, 0.0f);                                // b1
      uniform_block(static_cast<std::size_t>(2 * d) * d,
                    1.0f / std::sqrt(static_cast<float>(2 * d)));  // w2
      const_block(d, 0.0f);                                        // b2
    }
    for (int i = 0; i < d; ++i) {
      w.push_back(static_cast<float>(rng.uniform(0.9, 1.1)));  // shared scale
    }
    uniform_block(static_cast<std::size_t>(d) * kVocab, ws);
    return w;
  });
  if (flat.size() != total) {
    throw std::runtime_error("toy-vlm: weight blob size mismatch");
  }

  // carve the flat blob into parameter views
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    std::vector<float> v(flat.begin() + off, flat.begin() + off + n);
    off += n;
    return v;
  };
  patch_embed_ = take(static_cast<std::size_t>(pf) * d);
  byte_embed_ = take(256u * d);
  block_params_.resize(blocks_);
  for (int b = 0; b < blocks_; ++b) {
    Block& blk = block_params_[b];
    blk.gamma = take(d);
    blk.beta = take(d);
    blk.w_self = take(static_cast<std::size_t>(d) * d);
    blk.w_ctx = take(static_cast<std::size_t>(d) * d);
    blk.w1 = take(static_cast<std::size_t>(d) * 2 * d);
    blk.b1 = take(2u * d);
    blk.w2 = take(static_cast<std::size_t>(2 * d) * d);
    blk.b2 = take(d);
  }
  shared_scale_ = take(d);
  head_w_ = take(static_cast<std::size_t>(d) * kVocab);
}

std::vector<std::string> ToyVlmAdapter::named_layers() const {
  std::vector<std::string> names;
  names.push_back("embed");
  for (int b = 0; b < blocks_; ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    names.push_back(p + "norm");
    names.push_back(p + "mix");
    names.push_back(p + "mlp");
  }
  names.push_back("shared.scale");
  names.push_back("head");
  return names;
}

std::string ToyVlmAdapter::probe_layer_name(int index) const {
  if (index < 1 || index > blocks_) {
    throw std::invalid_argument("toy-vlm: probe layer index out of range");
  }
  return "blocks." + std::to_string(index - 1) + ".norm";
}

ModelInput ToyVlmAdapter::preprocess(const std::vector<std::uint8_t>& image_bytes,
                                     const std::string& image_path,
                                     const std::string& prompt) const {
  if (prompt.empty()) {
    throw std::runtime_error("toy-vlm: prompt must be non-empty");
  }
  const Image img = decode_image(image_bytes);

  const int P = patch_size_;
  const int px = (img.width + P - 1) / P;
  const int py = (img.height + P - 1) / P;
  const std::int64_t n_patches = static_cast<std::int64_t>(px) * py;
  const int pf = 3 * P * P;

  Tensor patches = Tensor::zeros({n_patches, pf});
  for (int gy = 0; gy < py; ++gy) {
    for (int gx = 0; gx < px; ++gx) {
      float* row = patches.row(static_cast<std::int64_t>(gy) * px + gx);
      for (int y = 0; y < P; ++y) {
        for (int x = 0; x < P; ++x) {
          const int ix = gx * P + x;
          const int iy = gy * P + y;
          if (ix >= img.width || iy >= img.height) continue;  // zero padding
          const std::uint8_t* p = img.pixel(ix, iy);
          const int base = 3 * (y * P + x);
          row[base + 0] = p[0] / 255.0f;
          row[base + 1] = p[1] / 255.0f;
          row[base + 2] = p[2] / 255.0f;
        }
      }
    }
  }

  ModelInput input;
  input.image_path = image_path;
  input.prompt = prompt;
  input.patches = std::move(patches);
  input.token_ids.reserve(prompt.size());
  for (unsigned char c : prompt) input.token_ids.push_back(static_cast<std::int32_t>(c));

  if (input.token_count() > kContextBudget) {
    throw std::runtime_error("toy-vlm: input exceeds context budget of " +
                             std::to_string(kContextBudget) + " tokens");
  }
  return input;
}

void ToyVlmAdapter::fire_checked(const std::string& layer, const Tensor& t) {
  hooks_.fire(layer, t);
  ++fires_this_forward_;
  if (fail_after_fires_ && fires_this_forward_ >= *fail_after_fires_) {
    fail_after_fires_.reset();
    throw std::runtime_error("toy-vlm: injected forward failure");
  }
}

Tensor ToyVlmAdapter::forward(const ModelInput& input) {
  namespace k = kernels;
  const int d = d_model_;
  const std::int64_t T = input.token_count();
  if (T == 0) throw std::runtime_error("toy-vlm: empty input");
  fires_this_forward_ = 0;

  const std::int64_t n_patches = input.patches.dims[0];
  const int pf = 3 * patch_size_ * patch_size_;

  // embed: patch projection for image tokens, byte table for prompt tokens,
  // plus a fixed sinusoidal position term
  Tensor x = Tensor::zeros({1, T, d});
  float* X = x.data.data();
  for (std::int64_t t = 0; t < n_patches; ++t) {
    const float* feat = input.patches.row(t);
    float* out = X + t * d;
    for (int f = 0; f < pf; ++f) {
      if (feat[f] != 0.0f) k::axpy_f32(feat[f], &patch_embed_[static_cast<std::size_t>(f) * d], out, d);
    }
  }
  for (std::size_t i = 0; i < input.token_ids.size(); ++i) {
    const std::int32_t id = input.token_ids[i] & 0xFF;
    float* out = X + (n_patches + static_cast<std::int64_t>(i)) * d;
    k::axpy_f32(1.0f, &byte_embed_[static_cast<std::size_t>(id) * d], out, d);
  }
  for (std::int64_t t = 0; t < T; ++t) {
    float* out = X + t * d;
    for (int j = 0; j < d; ++j) {
      const float angle = static_cast<float>(t + 1) *
                          std::pow(10000.0f, -static_cast<float>(2 * (j / 2)) / d);
      out[j] += 0.1f * ((j % 2 == 0) ? std::sin(angle) : std::cos(angle));
    }
  }
  fire_checked("embed", x);

  std::vector<float> normed(static_cast<std::size_t>(T) * d);
  std::vector<float> ctx(d);
  std::vector<float> buf(static_cast<std::size_t>(T) * d);
  std::vector<float> hidden(2 * d);

  for (int b = 0; b < blocks_; ++b) {
    const Block& blk = block_params_[b];
    const std::string prefix = "blocks." + std::to_string(b) + ".";

    // layernorm
    for (std::int64_t t = 0; t < T; ++t) {
      const float* in = X + t * d;
      float* out = normed.data() + t * d;
      const float mean = k::sum_f32(in, d) / d;
      float var = 0.0f;
      for (int j = 0; j < d; ++j) {
        const float c = in[j] - mean;
        var += c * c;
      }
      var /= d;
      const float inv = 1.0f / std::sqrt(var + 1e-5f);
      for (int j = 0; j < d; ++j) {
        out[j] = blk.gamma[j] * ((in[j] - mean) * inv) + blk.beta[j];
      }
    }
    fire_checked(prefix + "norm", Tensor({1, T, d}, normed));

    // mix: per-token self map plus a global context map of the token mean
    std::fill(ctx.begin(), ctx.end(), 0.0f);
    for (std::int64_t t = 0; t < T; ++t) {
      k::axpy_f32(1.0f, normed.data() + t * d, ctx.data(), d);
    }
    k::scale_f32(1.0f / static_cast<float>(T), ctx.data(), d);
    std::vector<float> ctx_out(d, 0.0f);
    for (int j = 0; j < d; ++j) {
      if (ctx[j] != 0.0f) k::axpy_f32(ctx[j], &blk.w_ctx[static_cast<std::size_t>(j) * d], ctx_out.data(), d);
    }
    std::fill(buf.begin(), buf.end(), 0.0f);
    for (std::int64_t t = 0; t < T; ++t) {
      const float* in = normed.data() + t * d;
      float* out = buf.data() + t * d;
      for (int j = 0; j < d; ++j) {
        if (in[j] != 0.0f) k::axpy_f32(in[j], &blk.w_self[static_cast<std::size_t>(j) * d], out, d);
      }
      k::axpy_f32(1.0f, ctx_out.data(), out, d);
    }
    fire_checked(prefix + "mix", Tensor({1, T, d}, buf));
    k::axpy_f32(1.0f, buf.data(), X, static_cast<std::size_t>(T) * d);

    // mlp
    std::fill(buf.begin(), buf.end(), 0.0f);
    for (std::int64_t t = 0; t < T; ++t) {
      const float* in = X + t * d;
      float* out = buf.data() + t * d;
      std::copy(blk.b1.begin(), blk.b1.end(), hidden.begin());
      for (int j = 0; j < d; ++j) {
        if (in[j] != 0.0f) k::axpy_f32(in[j], &blk.w1[static_cast<std::size_t>(j) * 2 * d], hidden.data(), 2 * d);
      }
      k::relu_f32(hidden.data(), 2 * d);
      std::copy(blk.b2.begin(), blk.b2.end(), out);
      for (int j = 0; j < 2 * d; ++j) {
        if (hidden[j] != 0.0f) k::axpy_f32(hidden[j], &blk.w2[static_cast<std::size_t>(j) * d], out, d);
      }
    }
    fire_checked(prefix + "mlp", Tensor({1, T, d}, buf));
    k::axpy_f32(1.0f, buf.data(), X, static_cast<std::size_t>(T) * d);

    // shared per-channel scale, applied at the end of every block
    for (std::int64_t t = 0; t < T; ++t) {
      float* row = X + t * d;
      for (int j = 0; j < d; ++j) row[j] *= shared_scale_[j];
    }
    fire_checked("shared.scale", x);
  }

  Tensor logits = Tensor::zeros({1, T, kVocab});
  for (std::int64_t t = 0; t < T; ++t) {
    const float* in = X + t * d;
    float* out = logits.data.data() + t * kVocab;
    for (int j = 0; j < d; ++j) {
      if (in[j] != 0.0f) k::axpy_f32(in[j], &head_w_[static_cast<std::size_t>(j) * kVocab], out, kVocab);
    }
  }
  fire_checked("head", logits);
  return logits;
}

std::uint64_t ToyVlmAdapter::param_count() const {
  const std::uint64_t d = static_cast<std::uint64_t>(d_model_);
  const std::uint64_t pf = 3ull * patch_size_ * patch_size_;
  return pf * d + 256ull * d +
         static_cast<std::uint64_t>(blocks_) * (6 * d * d + 5 * d) + d + d * kVocab;
}

}  // namespace tlens
