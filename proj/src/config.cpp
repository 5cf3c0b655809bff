// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/config.hpp"

#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace tlens {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "architecture", "model_path", "model", "output_db",
      "input_dir",    "prompt",     "modules"};
  return keys;
}

std::string require_scalar(const YAML::Node& root, const std::string& key) {
  const YAML::Node node = root[key];
  if (!node || node.IsNull()) {
    throw ConfigError("config: missing required field '" + key + "'");
  }
  if (!node.IsScalar()) {
    throw ConfigError("config: field '" + key + "' must be a scalar");
  }
  std::string value = node.as<std::string>();
  if (value.empty()) {
    throw ConfigError("config: field '" + key + "' must be non-empty");
  }
  return value;
}

ExtractionConfig from_yaml(const YAML::Node& root, std::filesystem::path base_dir) {
  if (!root.IsMap()) {
    throw ConfigError("config: top level must be a mapping");
  }
  ExtractionConfig cfg;
  cfg.base_dir = std::move(base_dir);
  cfg.architecture = require_scalar(root, "architecture");
  cfg.model_path = require_scalar(root, "model_path");
  cfg.output_db = require_scalar(root, "output_db");
  cfg.input_dir = require_scalar(root, "input_dir");
  cfg.prompt = require_scalar(root, "prompt");

  const YAML::Node modules = root["modules"];
  if (!modules || modules.IsNull()) {
    throw ConfigError("config: missing required field 'modules'");
  }
  if (!modules.IsSequence() || modules.size() == 0) {
    throw ConfigError("config: 'modules' must be a non-empty list of layer names");
  }
  std::set<std::string> seen;
  for (const YAML::Node& m : modules) {
    if (!m.IsScalar()) throw ConfigError("config: 'modules' entries must be strings");
    std::string name = m.as<std::string>();
    if (name.empty()) throw ConfigError("config: 'modules' entries must be non-empty");
    if (!seen.insert(name).second) {
      throw ConfigError("config: duplicate module name '" + name + "'");
    }
    cfg.modules.push_back(std::move(name));
  }

  // `model:` is an ordered list of single-key maps; ordering is preserved
  // because consumers may attach meaning to it.
  if (const YAML::Node model = root["model"]; model && !model.IsNull()) {
    if (!model.IsSequence()) {
      throw ConfigError("config: 'model' must be a list of single-key maps");
    }
    for (const YAML::Node& entry : model) {
      if (!entry.IsMap() || entry.size() != 1) {
        throw ConfigError("config: each 'model' entry must be a single key: value pair");
      }
      for (const auto& kv : entry) {
        cfg.model_options.emplace_back(kv.first.as<std::string>(),
                                       kv.second.as<std::string>());
      }
    }
  }

  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (known_keys().count(key)) continue;
    std::stringstream out;
    out << kv.second;
    cfg.extras[key] = out.str();
  }
  return cfg;
}

}  // namespace

std::filesystem::path ExtractionConfig::resolved_output_db() const {
  std::filesystem::path p(output_db);
  if (p.is_absolute() || base_dir.empty()) return p;
  return (base_dir / p).lexically_normal();
}

std::filesystem::path ExtractionConfig::resolved_input_dir() const {
  std::filesystem::path p(input_dir);
  if (p.is_absolute() || base_dir.empty()) return p;
  return (base_dir / p).lexically_normal();
}

bool ExtractionConfig::extra_flag(const std::string& key) const {
  auto it = extras.find(key);
  if (it == extras.end()) return false;
  return it->second == "true" || it->second == "1" || it->second == "yes";
}

ExtractionConfig parse_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) {
    throw ConfigError("config: file not found: " + path.string());
  }
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: malformed YAML in " + path.string() + ": " + e.what());
  }
  return from_yaml(root, path.has_parent_path() ? path.parent_path()
                                                : std::filesystem::path("."));
}

ExtractionConfig parse_config_string(const std::string& text,
                                     const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: malformed YAML: ") + e.what());
  }
  return from_yaml(root, base_dir);
}

std::string serialize_config(const ExtractionConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "architecture" << YAML::Value << cfg.architecture;
  out << YAML::Key << "model_path" << YAML::Value << cfg.model_path;
  if (!cfg.model_options.empty()) {
    out << YAML::Key << "model" << YAML::Value << YAML::BeginSeq;
    for (const auto& [k, v] : cfg.model_options) {
      out << YAML::BeginMap << YAML::Key << k << YAML::Value << v << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "output_db" << YAML::Value << cfg.output_db;
  out << YAML::Key << "input_dir" << YAML::Value << cfg.input_dir;
  out << YAML::Key << "prompt" << YAML::Value << cfg.prompt;
  out << YAML::Key << "modules" << YAML::Value << YAML::BeginSeq;
  for (const std::string& m : cfg.modules) out << m;
  out << YAML::EndSeq;
  for (const auto& [key, value] : cfg.extras) {
    out << YAML::Key << key << YAML::Value << YAML::Load(value);
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace tlens
