// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/extraction.hpp"

#include <algorithm>

#include "tlens/image.hpp"

namespace tlens {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::map<std::string, std::string> match_layers(
    const std::vector<std::string>& requested,
    const std::vector<std::string>& available) {
  if (requested.empty()) {
    throw ExtractionError("extraction: no layers requested");
  }
  if (available.empty()) {
    throw ExtractionError("extraction: model reports no named layers");
  }
  std::map<std::string, std::string> mapping;
  std::vector<std::string> missing;
  for (const std::string& name : requested) {
    if (std::find(available.begin(), available.end(), name) != available.end()) {
      mapping[name] = name;
    } else {
      missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    std::string msg = "extraction: requested layer(s) not found:";
    for (const std::string& name : missing) {
      // closest 5 available names by edit distance, ties by list order
      std::vector<std::pair<std::size_t, std::string>> scored;
      for (const std::string& avail : available) {
        scored.emplace_back(edit_distance(name, avail), avail);
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      msg += "\n  '" + name + "' — did you mean: ";
      const std::size_t n = std::min<std::size_t>(5, scored.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (i) msg += ", ";
        msg += scored[i].second;
      }
    }
    throw ExtractionError(msg);
  }
  return mapping;
}

namespace {

// RAII hook registration; deregistration runs on every exit path.
class ScopedHooks {
 public:
  ScopedHooks(ModelAdapter& adapter, const std::vector<std::string>& layers,
              CaptureSet& out)
      : adapter_(adapter) {
    for (const std::string& layer : layers) {
      handles_.push_back(adapter_.hooks().add(
          layer, [&out, layer](const std::string& l, const Tensor& t) {
            int idx = 0;
            for (const Capture& c : out) {
              if (c.layer == l) ++idx;
            }
            // copy the output tensor out of the model's working memory
            out.push_back(Capture{layer, idx, t});
          }));
    }
  }
  ~ScopedHooks() {
    for (std::uint64_t h : handles_) adapter_.hooks().remove(h);
  }

 private:
  ModelAdapter& adapter_;
  std::vector<std::uint64_t> handles_;
};

}  // namespace

CaptureSet extract_one(ModelAdapter& adapter, const ModelInput& input,
                       const std::vector<std::string>& layer_names) {
  if (adapter.hooks().count() != 0) {
    throw ExtractionError("extraction: stale interception callbacks present (" +
                          std::to_string(adapter.hooks().count()) + ")");
  }
  CaptureSet captures;
  {
    ScopedHooks hooks(adapter, layer_names, captures);
    adapter.forward(input);  // exceptions propagate after hook removal
  }
  return captures;
}

std::vector<std::filesystem::path> list_input_images(
    const std::filesystem::path& dir, bool recursive) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec) || ec) {
    throw ExtractionError("extraction: input directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  auto consider = [&](const std::filesystem::directory_entry& entry) {
    if (!entry.is_regular_file()) return;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      files.push_back(entry.path());
    }
  };
  if (recursive) {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
      consider(entry);
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.string() < b.string(); });
  } else {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      consider(entry);
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  }
  return files;
}

std::int64_t run_extraction(const ExtractionConfig& cfg, ModelAdapter& adapter,
                            RecordSink& sink, const LabelMap* labels) {
  const auto mapping = match_layers(cfg.modules, adapter.named_layers());
  std::vector<std::string> layers;
  for (const std::string& m : cfg.modules) layers.push_back(mapping.at(m));

  const auto images =
      list_input_images(cfg.resolved_input_dir(), cfg.extra_flag("recursive"));
  if (images.empty()) {
    throw ExtractionError("extraction: empty input directory: " +
                          cfg.resolved_input_dir().string());
  }

  const bool allow_nonfinite = cfg.allow_nonfinite();
  std::int64_t written = 0;
  for (const auto& path : images) {
    try {
      const auto bytes = read_file_bytes(path);
      const ModelInput input = adapter.preprocess(bytes, path.string(), cfg.prompt);
      const CaptureSet captures = extract_one(adapter, input, layers);
      std::optional<std::string> label;
      if (labels != nullptr) {
        auto it = labels->find(path.string());
        if (it == labels->end()) it = labels->find(path.filename().string());
        if (it != labels->end()) label = it->second;
      }
      for (const Capture& c : captures) {
        sink.insert(make_record(cfg.model_path, cfg.architecture, path.string(),
                                cfg.prompt, label, c.layer, c.tensor,
                                allow_nonfinite, adapter.precision_label()));
        ++written;
      }
    } catch (const std::exception& e) {
      throw ExtractionError("extraction: failed on image '" + path.string() +
                            "': " + e.what());
    }
  }
  sink.flush();
  return written;
}

}  // namespace tlens
