// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tlens/tensor.hpp"

namespace tlens {

// Preprocessed model input. Opaque to the extraction engine; adapters decide
// what goes in. Provenance strings are always populated.
struct ModelInput {
  std::string image_path;
  std::string prompt;
  Tensor patches;                       // per-patch image features
  std::vector<std::int32_t> token_ids;  // prompt tokens

  std::int64_t token_count() const {
    return (patches.rank() >= 1 ? patches.dims[0] : 0) +
           static_cast<std::int64_t>(token_ids.size());
  }

  friend bool operator==(const ModelInput& a, const ModelInput& b) {
    return a.image_path == b.image_path && a.prompt == b.prompt &&
           a.patches == b.patches && a.token_ids == b.token_ids;
  }
};

// Interception callbacks fired while a forward pass executes. Mirrors the
// usual forward-hook contract: register on a named layer, receive that
// layer's output tensor on every firing, unregister via the handle.
class HookRegistry {
 public:
  using Callback = std::function<void(const std::string& layer, const Tensor& output)>;

  std::uint64_t add(const std::string& layer, Callback cb);
  void remove(std::uint64_t handle);
  std::size_t count() const { return hooks_.size(); }
  bool watched(const std::string& layer) const;
  // Called by adapters as each named layer produces its output.
  void fire(const std::string& layer, const Tensor& output) const;

 private:
  struct Entry {
    std::string layer;
    Callback cb;
  };
  std::map<std::uint64_t, Entry> hooks_;  // handle order == registration order
  std::uint64_t next_handle_ = 1;
};

struct ModelIdentity {
  std::string name;          // checkpoint identifier (config model_path)
  std::string architecture;  // adapter family string
};

// Uniform surface over an inspectable model: identity, named layers,
// preprocessing, and a deterministic forward pass that fires hooks.
//
// A loaded adapter belongs to one worker at a time: forward passes share the
// interception state. Distinct adapter instances are independent.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;

  virtual const ModelIdentity& identity() const = 0;
  // Every interceptable layer, fully qualified, in model-definition order.
  virtual std::vector<std::string> named_layers() const = 0;
  // Number of stacked primary layers (for layer-selection math).
  virtual int layer_count() const = 0;
  // Name of the representation layer for a 1-based stack index.
  virtual std::string probe_layer_name(int index) const = 0;
  virtual ModelInput preprocess(const std::vector<std::uint8_t>& image_bytes,
                                const std::string& image_path,
                                const std::string& prompt) const = 0;
  virtual Tensor forward(const ModelInput& input) = 0;

  virtual std::uint64_t param_count() const = 0;
  virtual std::string precision_label() const { return "float32"; }

  HookRegistry& hooks() { return hooks_; }
  const HookRegistry& hooks() const { return hooks_; }

 protected:
  HookRegistry hooks_;
};

// Layer indices probed by the built-in analyses: the middle (ceil(L/2))
// and last layers of an L-layer stack. 1-based.
std::set<int> select_probe_layers(int layer_count);

struct AdapterSpec {
  std::string model_path;
  std::vector<std::pair<std::string, std::string>> options;
  std::optional<std::string> cache_dir;  // from LENS_CACHE_DIR when set
};

using AdapterFactory = std::function<std::unique_ptr<ModelAdapter>(const AdapterSpec&)>;

// Registry keyed by architecture string. Adding a model never touches the
// engine: register a factory and reference it from a config file.
void register_adapter(const std::string& architecture, AdapterFactory factory);
std::unique_ptr<ModelAdapter> create_adapter(const std::string& architecture,
                                             const AdapterSpec& spec);
std::vector<std::string> registered_architectures();

// Weight memoization for the generated reference checkpoints. Returns the
// cached blob from <cache_dir>/<key>.bin when present and size-matched,
// otherwise generates and best-effort persists it.
std::vector<float> cached_weights(const std::optional<std::string>& cache_dir,
                                  const std::string& key, std::size_t count,
                                  const std::function<std::vector<float>()>& generate);

}  // namespace tlens
