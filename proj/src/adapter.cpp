// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/adapter.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "tlens/linear_oracle.hpp"
#include "tlens/toy_vlm.hpp"

namespace tlens {

std::uint64_t HookRegistry::add(const std::string& layer, Callback cb) {
  const std::uint64_t handle = next_handle_++;
  hooks_.emplace(handle, Entry{layer, std::move(cb)});
  return handle;
}

void HookRegistry::remove(std::uint64_t handle) {
  hooks_.erase(handle);
}

bool HookRegistry::watched(const std::string& layer) const {
  for (const auto& [h, entry] : hooks_) {
    if (entry.layer == layer) return true;
  }
  return false;
}

void HookRegistry::fire(const std::string& layer, const Tensor& output) const {
  for (const auto& [h, entry] : hooks_) {
    if (entry.layer == layer) entry.cb(layer, output);
  }
}

std::set<int> select_probe_layers(int layer_count) {
  if (layer_count < 1) {
    throw std::invalid_argument("select_probe_layers: layer count must be >= 1");
  }
  const int middle = (layer_count + 1) / 2;  // ceil(L/2)
  return {middle, layer_count};
}

namespace {

std::map<std::string, AdapterFactory>& factory_map() {
  static std::map<std::string, AdapterFactory> factories;
  return factories;
}

void ensure_builtins() {
  static std::once_flag once;
  std::call_once(once, [] {
    factory_map().emplace("toy-vlm", [](const AdapterSpec& spec) {
      return std::unique_ptr<ModelAdapter>(new ToyVlmAdapter(spec));
    });
    factory_map().emplace("linear-probe-oracle", [](const AdapterSpec& spec) {
      return std::unique_ptr<ModelAdapter>(new LinearOracleAdapter(spec));
    });
  });
}

}  // namespace

void register_adapter(const std::string& architecture, AdapterFactory factory) {
  ensure_builtins();
  factory_map()[architecture] = std::move(factory);
}

std::unique_ptr<ModelAdapter> create_adapter(const std::string& architecture,
                                             const AdapterSpec& spec) {
  ensure_builtins();
  auto it = factory_map().find(architecture);
  if (it == factory_map().end()) {
    std::string known;
    for (const auto& [name, f] : factory_map()) {
      if (!known.empty()) known += ", ";
      known += name;
    }
    throw std::runtime_error("adapter: unknown architecture '" + architecture +
                             "' (registered: " + known + ")");
  }
  return it->second(spec);
}

std::vector<std::string> registered_architectures() {
  ensure_builtins();
  std::vector<std::string> names;
  for (const auto& [name, f] : factory_map()) names.push_back(name);
  return names;
}

std::vector<float> cached_weights(const std::optional<std::string>& cache_dir,
                                  const std::string& key, std::size_t count,
                                  const std::function<std::vector<float>()>& generate) {
  namespace fs = std::filesystem;
  fs::path file;
  if (cache_dir && !cache_dir->empty()) {
    std::string safe;
    for (char c : key) {
      safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')
                  ? c
                  : '_';
    }
    file = fs::path(*cache_dir) / (safe + ".bin");
    std::error_code ec;
    if (fs::exists(file, ec) && !ec &&
        fs::file_size(file, ec) == count * sizeof(float) && !ec) {
      std::ifstream in(file, std::ios::binary);
      std::vector<float> data(count);
      in.read(reinterpret_cast<char*>(data.data()),
              static_cast<std::streamsize>(count * sizeof(float)));
      if (in) return data;
    }
  }
  std::vector<float> data = generate();
  if (!file.empty()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (out) {
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
    }
  }
  return data;
}

}  // namespace tlens
