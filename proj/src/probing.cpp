// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/probing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "tlens/csvio.hpp"
#include "tlens/kernels.hpp"
#include "tlens/rng.hpp"

namespace tlens {

void ProbeDataset::push_example(const float* x, int label) {
  features.insert(features.end(), x, x + dim);
  labels.push_back(label);
}

void ProbeDataset::validate() const {
  if (dim <= 0) throw ProbingError("probing: dataset has no feature dimension");
  if (features.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw ProbingError("probing: feature matrix does not match label count");
  }
  if (num_classes < 2) throw ProbingError("probing: need at least 2 classes");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ProbingError("probing: label out of range [0, c)");
    }
  }
}

const char* stars_label(Stars s) {
  switch (s) {
    case Stars::kOne: return "*";
    case Stars::kTwo: return "**";
    case Stars::kThree: return "***";
    default: return "none";
  }
}

std::optional<Stars> stars_from_label(const std::string& s) {
  if (s == "none" || s.empty()) return Stars::kNone;
  if (s == "*") return Stars::kOne;
  if (s == "**") return Stars::kTwo;
  if (s == "***") return Stars::kThree;
  return std::nullopt;
}

std::vector<float> mean_pool(const Tensor& tensor) {
  const Tensor* t = &tensor;
  Tensor squeezed;
  if (tensor.rank() == 3 && tensor.dims[0] == 1) {
    squeezed = Tensor({tensor.dims[1], tensor.dims[2]}, tensor.data);
    t = &squeezed;
  } else if (tensor.rank() == 1) {
    squeezed = Tensor({1, tensor.dims[0]}, tensor.data);
    t = &squeezed;
  }
  if (t->rank() != 2) {
    throw ProbingError("probing: mean_pool expects a tokens x d tensor, got rank " +
                       std::to_string(tensor.rank()));
  }
  const std::int64_t tokens = t->rows();
  const std::int64_t d = t->cols();
  if (tokens < 1 || d < 1) {
    throw ProbingError("probing: mean_pool on empty token axis");
  }
  std::vector<float> out(static_cast<std::size_t>(d), 0.0f);
  for (std::int64_t r = 0; r < tokens; ++r) {
    kernels::axpy_f32(1.0f, t->row(r), out.data(), d);
  }
  kernels::scale_f32(1.0f / static_cast<float>(tokens), out.data(), d);
  return out;
}

std::pair<ProbeDataset, ProbeDataset> split_train_test(const ProbeDataset& dataset,
                                                       std::uint64_t seed) {
  dataset.validate();
  const std::size_t n = dataset.size();
  if (n < 5) {
    throw ProbingError("probing: dataset too small for an 80/20 split (need >= 5, got " +
                       std::to_string(n) + ")");
  }
  const std::size_t n_train = (n * 8) / 10;
  Rng rng(Rng::derive(seed, "train-test-split"));
  const auto perm = rng.permutation(n);

  ProbeDataset train, test;
  train.dim = test.dim = dataset.dim;
  train.num_classes = test.num_classes = dataset.num_classes;
  train.split_name = test.split_name = dataset.split_name;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).push_example(dataset.row(perm[i]), dataset.labels[perm[i]]);
  }
  return {std::move(train), std::move(test)};
}

Probe::Probe(int in_dim, int hidden, int classes, std::uint64_t seed)
    : in_dim_(in_dim), hidden_(hidden), classes_(classes) {
  if (in_dim <= 0 || hidden <= 0 || classes < 2) {
    throw ProbingError("probing: invalid probe dimensions");
  }
  Rng rng(Rng::derive(seed, "probe-init"));
  const float s1 = 1.0f / std::sqrt(static_cast<float>(in_dim));
  const float s2 = 1.0f / std::sqrt(static_cast<float>(hidden));
  w1_.resize(static_cast<std::size_t>(in_dim) * hidden);
  for (float& v : w1_) v = static_cast<float>(rng.uniform(-s1, s1));
  b1_.assign(hidden, 0.0f);
  w2t_.resize(static_cast<std::size_t>(classes) * hidden);
  for (float& v : w2t_) v = static_cast<float>(rng.uniform(-s2, s2));
  b2_.assign(classes, 0.0f);
}

void Probe::logits(const float* x, float* scratch, float* out) const {
  std::copy(b1_.begin(), b1_.end(), scratch);
  for (int k = 0; k < in_dim_; ++k) {
    if (x[k] != 0.0f) {
      kernels::axpy_f32(x[k], &w1_[static_cast<std::size_t>(k) * hidden_], scratch, hidden_);
    }
  }
  kernels::relu_f32(scratch, hidden_);
  for (int j = 0; j < classes_; ++j) {
    out[j] = kernels::dot_f32(scratch, &w2t_[static_cast<std::size_t>(j) * hidden_], hidden_) +
             b2_[j];
  }
}

int Probe::predict(const float* x, float* scratch) const {
  std::vector<float> z(classes_);
  logits(x, scratch, z.data());
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

namespace {

// softmax cross-entropy; returns loss and writes dz = softmax - onehot
double softmax_xent(const float* z, int classes, int label, float* dz) {
  float m = z[0];
  for (int j = 1; j < classes; ++j) m = std::max(m, z[j]);
  double sum = 0.0;
  for (int j = 0; j < classes; ++j) sum += std::exp(static_cast<double>(z[j]) - m);
  const double loss = std::log(sum) - (static_cast<double>(z[label]) - m);
  if (dz != nullptr) {
    for (int j = 0; j < classes; ++j) {
      dz[j] = static_cast<float>(std::exp(static_cast<double>(z[j]) - m) / sum);
    }
    dz[label] -= 1.0f;
  }
  return loss;
}

}  // namespace

double Probe::mean_loss(const ProbeDataset& data) const {
  if (data.size() == 0) throw ProbingError("probing: loss on empty dataset");
  std::vector<float> scratch(hidden_);
  std::vector<float> z(classes_);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    logits(data.row(i), scratch.data(), z.data());
    total += softmax_xent(z.data(), classes_, data.labels[i], nullptr);
  }
  return total / static_cast<double>(data.size());
}

Probe train_probe(const ProbeDataset& train, const ProbeHyperparams& h) {
  train.validate();
  if (h.learning_rate <= 0 || h.num_epochs <= 0 || h.batch_size <= 0 || h.hidden_size <= 0) {
    throw ProbingError("probing: hyperparameters must be positive");
  }
  const int d = train.dim;
  const int hid = h.hidden_size;
  const int c = train.num_classes;
  const std::size_t n = train.size();

  Probe probe(d, hid, c, h.seed);
  Rng shuffle_rng(Rng::derive(h.seed, "epoch-shuffle"));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<float> hidden_act(hid);
  std::vector<float> z(c), dz(c), dh(hid);
  std::vector<float> gw1(static_cast<std::size_t>(d) * hid);
  std::vector<float> gb1(hid);
  std::vector<float> gw2t(static_cast<std::size_t>(c) * hid);
  std::vector<float> gb2(c);

  for (int epoch = 0; epoch < h.num_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(h.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(h.batch_size));
      const std::size_t bsz = end - start;
      std::fill(gw1.begin(), gw1.end(), 0.0f);
      std::fill(gb1.begin(), gb1.end(), 0.0f);
      std::fill(gw2t.begin(), gw2t.end(), 0.0f);
      std::fill(gb2.begin(), gb2.end(), 0.0f);

      for (std::size_t bi = start; bi < end; ++bi) {
        const float* x = train.row(order[bi]);
        const int y = train.labels[order[bi]];
        probe.logits(x, hidden_act.data(), z.data());
        epoch_loss += softmax_xent(z.data(), c, y, dz.data());

        std::fill(dh.begin(), dh.end(), 0.0f);
        for (int j = 0; j < c; ++j) {
          kernels::axpy_f32(dz[j], &probe.w2t_[static_cast<std::size_t>(j) * hid], dh.data(), hid);
          kernels::axpy_f32(dz[j], hidden_act.data(), &gw2t[static_cast<std::size_t>(j) * hid], hid);
          gb2[j] += dz[j];
        }
        kernels::relu_grad_f32(hidden_act.data(), dh.data(), hid);
        for (int k = 0; k < d; ++k) {
          if (x[k] != 0.0f) {
            kernels::axpy_f32(x[k], dh.data(), &gw1[static_cast<std::size_t>(k) * hid], hid);
          }
        }
        kernels::axpy_f32(1.0f, dh.data(), gb1.data(), hid);
      }

      const float step = static_cast<float>(-h.learning_rate / static_cast<double>(bsz));
      kernels::axpy_f32(step, gw1.data(), probe.w1_.data(), gw1.size());
      kernels::axpy_f32(step, gb1.data(), probe.b1_.data(), gb1.size());
      kernels::axpy_f32(step, gw2t.data(), probe.w2t_.data(), gw2t.size());
      kernels::axpy_f32(step, gb2.data(), probe.b2_.data(), gb2.size());
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDiverged("probing: non-finite training loss at epoch " +
                             std::to_string(epoch) + " (lr=" + std::to_string(h.learning_rate) +
                             ", batch=" + std::to_string(h.batch_size) + ")");
    }
  }
  return probe;
}

double evaluate_probe(const Probe& probe, const ProbeDataset& test) {
  test.validate();
  if (test.size() == 0) throw ProbingError("probing: empty test set");
  if (test.dim != probe.in_dim()) {
    throw ProbingError("probing: feature dimension mismatch between probe and test set");
  }
  std::vector<float> scratch(probe.hidden());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (probe.predict(test.row(i), scratch.data()) == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

namespace {

ProbeDataset subset(const ProbeDataset& data, const std::vector<std::size_t>& idx,
                    std::size_t skip_begin, std::size_t skip_end, bool take_range) {
  ProbeDataset out;
  out.dim = data.dim;
  out.num_classes = data.num_classes;
  out.split_name = data.split_name;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const bool in_range = i >= skip_begin && i < skip_end;
    if (in_range == take_range) out.push_example(data.row(idx[i]), data.labels[idx[i]]);
  }
  return out;
}

}  // namespace

ProbeHyperparams grid_search_cv(const ProbeDataset& train, const HyperGrid& grid,
                                int k, int hidden_size, std::uint64_t seed,
                                GridSearchStats* stats) {
  train.validate();
  if (grid.learning_rates.size() != 3 || grid.num_epochs.size() != 3 ||
      grid.batch_sizes.size() != 3) {
    throw ProbingError("probing: hyperparameter grid must offer exactly 3 options per parameter");
  }
  if (k < 2) throw ProbingError("probing: k-fold CV needs k >= 2");
  const std::size_t n = train.size();
  if (n < static_cast<std::size_t>(k)) {
    throw ProbingError("probing: training set smaller than fold count");
  }

  // one seeded shuffle shared by every configuration; folds are contiguous
  // blocks of the shuffled order
  Rng rng(Rng::derive(seed, "cv-folds"));
  const auto perm = rng.permutation(n);
  std::vector<std::pair<std::size_t, std::size_t>> fold_bounds;
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t at = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    fold_bounds.emplace_back(at, at + len);
    at += len;
  }

  bool warned_single_class = false;
  ProbeHyperparams best;
  double best_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;

  // one init seed per fold, shared by every configuration: configurations are
  // compared from identical starting points, and equal-valued configurations
  // tie exactly (first in grid order wins)
  std::vector<std::uint64_t> fold_seeds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    fold_seeds[static_cast<std::size_t>(f)] =
        Rng::derive(seed, "cv-fit/fold" + std::to_string(f));
  }

  for (double lr : grid.learning_rates) {
    for (int epochs : grid.num_epochs) {
      for (int batch : grid.batch_sizes) {
        ProbeHyperparams h;
        h.learning_rate = lr;
        h.num_epochs = epochs;
        h.batch_size = batch;
        h.hidden_size = hidden_size;

        double loss_sum = 0.0;
        for (int f = 0; f < k; ++f) {
          const auto [lo, hi] = fold_bounds[f];
          ProbeDataset fold_train = subset(train, perm, lo, hi, false);
          ProbeDataset fold_val = subset(train, perm, lo, hi, true);
          if (fold_val.size() == 0 || fold_train.size() == 0) {
            throw ProbingError("probing: empty CV fold");
          }
          std::set<int> seen(fold_train.labels.begin(), fold_train.labels.end());
          if (seen.size() < 2 && !warned_single_class) {
            std::fprintf(stderr,
                         "probing: warning: CV fold %d holds a single class; "
                         "validation loss may be degenerate\n", f);
            warned_single_class = true;
          }
          h.seed = fold_seeds[static_cast<std::size_t>(f)];
          if (stats != nullptr) ++stats->probe_fits;
          try {
            const Probe probe = train_probe(fold_train, h);
            loss_sum += probe.mean_loss(fold_val);
          } catch (const TrainingDiverged&) {
            // a diverging configuration scores worst; the search goes on
            loss_sum = std::numeric_limits<double>::infinity();
          }
        }
        const double mean_loss = loss_sum / static_cast<double>(k);
        if (stats != nullptr) ++stats->config_evaluations;
        if (!have_best || mean_loss < best_loss) {
          best = h;
          best_loss = mean_loss;
          have_best = true;
        }
      }
    }
  }
  best.seed = seed;
  return best;
}

double control_experiment(const ProbeDataset& train, const ProbeDataset& test,
                          const ProbeHyperparams& h, std::uint64_t shuffle_seed) {
  ProbeDataset shuffled = train;
  Rng rng(Rng::derive(shuffle_seed, "control-shuffle"));
  rng.shuffle(shuffled.labels);
  const Probe probe = train_probe(shuffled, h);
  return evaluate_probe(probe, test);
}

Stars stars_for_z(double z) {
  if (z >= 3.090) return Stars::kThree;
  if (z >= 2.326) return Stars::kTwo;
  if (z >= 1.645) return Stars::kOne;
  return Stars::kNone;
}

Significance significance_test(double acc_main, double acc_control, int n_test) {
  if (n_test < 1) throw ProbingError("probing: significance test needs n_test >= 1");
  if (acc_main < 0.0 || acc_main > 1.0 || acc_control < 0.0 || acc_control > 1.0) {
    throw ProbingError("probing: accuracies must lie in [0, 1]");
  }
  const double pbar = (acc_main + acc_control) / 2.0;
  const double var = pbar * (1.0 - pbar) * (2.0 / static_cast<double>(n_test));
  Significance sig;
  if (var == 0.0) {
    sig.z = 0.0;  // only reachable when both accuracies coincide at 0 or 1
  } else {
    sig.z = (acc_main - acc_control) / std::sqrt(var);
  }
  sig.stars = stars_for_z(sig.z);
  return sig;
}

std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_path = table.column("image_path");
  const int c_prompt = table.column("prompt");
  const int c_split = table.column("split");
  const int c_label = table.column("label");
  if (c_path < 0 || c_split < 0 || c_label < 0) {
    throw ProbingError("probing: labels file must have columns image_path, prompt, split, label");
  }
  std::vector<LabelRow> rows;
  for (const auto& r : table.rows) {
    LabelRow row;
    row.image_path = r.at(c_path);
    if (c_prompt >= 0 && static_cast<std::size_t>(c_prompt) < r.size()) {
      row.prompt = r[c_prompt];
    }
    row.split = r.at(c_split);
    row.label = r.at(c_label);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ProbeResult> run_probing(const ActivationStore& store,
                                     const std::vector<LabelRow>& labels,
                                     const ProbingSpec& spec) {
  if (labels.empty()) throw ProbingError("probing: labels file is empty");

  std::vector<std::string> splits = spec.splits;
  if (splits.empty()) {
    std::set<std::string> seen;
    for (const LabelRow& row : labels) {
      if (seen.insert(row.split).second) splits.push_back(row.split);
    }
  }
  std::vector<std::string> layers = spec.layers;
  if (layers.empty()) layers = store.distinct_layers();
  if (layers.empty()) throw ProbingError("probing: store holds no records");

  std::vector<ProbeResult> results;
  for (const std::string& layer : layers) {
    QueryFilter filter;
    filter.layer = layer;
    if (!spec.model_name.empty()) filter.name = spec.model_name;
    const auto records = store.query(filter);
    if (records.empty()) {
      throw ProbingError("probing: no records for layer '" + layer + "'" +
                         (spec.model_name.empty() ? "" : " and model '" + spec.model_name + "'"));
    }
    // firing 0 per image: first row in insertion order wins
    std::map<std::string, const StoredRecord*> by_path;
    std::map<std::string, const StoredRecord*> by_file;
    for (const StoredRecord& sr : records) {
      by_path.emplace(sr.record.image_path, &sr);
      by_file.emplace(std::filesystem::path(sr.record.image_path).filename().string(), &sr);
    }

    for (const std::string& split : splits) {
      // class ids from sorted distinct labels
      std::set<std::string> label_set;
      for (const LabelRow& row : labels) {
        if (row.split == split) label_set.insert(row.label);
      }
      if (label_set.empty()) {
        throw ProbingError("probing: split '" + split + "' has no labelled examples");
      }
      std::map<std::string, int> class_of;
      int next = 0;
      for (const std::string& l : label_set) class_of[l] = next++;

      ProbeDataset data;
      data.num_classes = next;
      data.split_name = split;
      std::vector<std::string> missing;
      for (const LabelRow& row : labels) {
        if (row.split != split) continue;
        const StoredRecord* sr = nullptr;
        if (auto it = by_path.find(row.image_path); it != by_path.end()) {
          sr = it->second;
        } else {
          const std::string file = std::filesystem::path(row.image_path).filename().string();
          if (auto it2 = by_file.find(file); it2 != by_file.end()) sr = it2->second;
        }
        if (sr == nullptr) {
          missing.push_back(row.image_path);
          continue;
        }
        const std::vector<float> feat = mean_pool(sr->decoded());
        if (data.dim == 0) {
          data.dim = static_cast<int>(feat.size());
        } else if (data.dim != static_cast<int>(feat.size())) {
          throw ProbingError("probing: inconsistent feature dimensionality in layer '" +
                             layer + "'");
        }
        data.push_example(feat.data(), class_of.at(row.label));
      }
      if (!missing.empty()) {
        std::string msg = "probing: missing activations for split '" + split +
                          "', layer '" + layer + "':";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += " (+" + std::to_string(missing.size() - 10) + " more)";
        throw ProbingError(msg);
      }
      if (data.num_classes < 2) {
        throw ProbingError("probing: split '" + split + "' has a single label value");
      }

      const std::uint64_t pair_seed = Rng::derive(spec.seed, "probing/" + split + "/" + layer);
      auto [train, test] = split_train_test(data, pair_seed);

      ProbeHyperparams best =
          grid_search_cv(train, spec.grid, spec.k_folds, spec.hidden_size, pair_seed);
      // fresh fits on the full training set with the selected configuration
      best.seed = Rng::derive(pair_seed, "main-fit");
      const Probe main_probe = train_probe(train, best);
      const double main_acc = evaluate_probe(main_probe, test);

      ProbeHyperparams control_h = best;
      control_h.seed = Rng::derive(pair_seed, "control-fit");
      const double control_acc =
          control_experiment(train, test, control_h, Rng::derive(pair_seed, "control"));

      const Significance sig =
          significance_test(main_acc, control_acc, static_cast<int>(test.size()));

      ProbeResult res;
      res.split = split;
      res.layer = layer;
      res.main_accuracy = main_acc;
      res.control_accuracy = control_acc;
      res.n_test = static_cast<int>(test.size());
      res.z_score = sig.z;
      res.stars = sig.stars;
      res.best = best;
      results.push_back(std::move(res));
    }
  }
  return results;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ProbeResult>& results, std::uint64_t seed) {
  CsvTable table;
  table.comments.push_back("# seed=" + std::to_string(seed));
  table.header = {"split",  "layer", "main_acc", "control_acc", "n_test",
                  "z",      "stars", "best_lr",  "best_epochs", "best_batch"};
  char buf[64];
  for (const ProbeResult& r : results) {
    std::vector<std::string> row;
    row.push_back(r.split);
    row.push_back(r.layer);
    std::snprintf(buf, sizeof(buf), "%.6f", r.main_accuracy);
    row.push_back(buf);
    std::snprintf(buf, sizeof(buf), "%.6f", r.control_accuracy);
    row.push_back(buf);
    row.push_back(std::to_string(r.n_test));
    std::snprintf(buf, sizeof(buf), "%.6f", r.z_score);
    row.push_back(buf);
    row.push_back(stars_label(r.stars));
    std::snprintf(buf, sizeof(buf), "%g", r.best.learning_rate);
    row.push_back(buf);
    row.push_back(std::to_string(r.best.num_epochs));
    row.push_back(std::to_string(r.best.batch_size));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

std::vector<ProbeResult> read_results_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_split = table.column("split");
  const int c_layer = table.column("layer");
  const int c_main = table.column("main_acc");
  const int c_control = table.column("control_acc");
  const int c_n = table.column("n_test");
  const int c_z = table.column("z");
  const int c_stars = table.column("stars");
  if (c_split < 0 || c_layer < 0 || c_main < 0 || c_control < 0 || c_stars < 0) {
    throw ProbingError("probing: results CSV missing required columns");
  }
  std::vector<ProbeResult> results;
  for (const auto& row : table.rows) {
    ProbeResult r;
    r.split = row.at(c_split);
    r.layer = row.at(c_layer);
    r.main_accuracy = std::stod(row.at(c_main));
    r.control_accuracy = std::stod(row.at(c_control));
    if (c_n >= 0) r.n_test = std::stoi(row.at(c_n));
    if (c_z >= 0) r.z_score = std::stod(row.at(c_z));
    const auto stars = stars_from_label(row.at(c_stars));
    if (!stars) throw ProbingError("probing: bad stars value '" + row.at(c_stars) + "'");
    r.stars = *stars;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace tlens
