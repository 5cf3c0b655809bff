// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tlens/store.hpp"
#include "tlens/tensor.hpp"

namespace tlens {

// c-way classification task over fixed-dimensional features.
struct ProbeDataset {
  std::vector<float> features;  // n x dim, row-major
  std::vector<int> labels;      // values in [0, num_classes)
  int dim = 0;
  int num_classes = 0;
  std::string split_name;

  std::size_t size() const { return labels.size(); }
  const float* row(std::size_t i) const { return features.data() + i * dim; }
  float* row(std::size_t i) { return features.data() + i * dim; }
  void push_example(const float* x, int label);
  void validate() const;  // dims consistent, labels in range, c >= 2
};

struct ProbeHyperparams {
  double learning_rate = 1e-3;
  int num_epochs = 30;
  int batch_size = 32;
  int hidden_size = 512;
  std::uint64_t seed = 0;

  friend bool operator==(const ProbeHyperparams&, const ProbeHyperparams&) = default;
};

// 3 options per tuned parameter (27 configurations total).
struct HyperGrid {
  std::vector<double> learning_rates{1e-4, 1e-3, 1e-2};
  std::vector<int> num_epochs{10, 30, 100};
  std::vector<int> batch_sizes{16, 32, 64};
};

enum class Stars { kNone, kOne, kTwo, kThree };
const char* stars_label(Stars s);           // "none", "*", "**", "***"
std::optional<Stars> stars_from_label(const std::string& s);

struct Significance {
  double z = 0.0;
  Stars stars = Stars::kNone;
};

struct ProbeResult {
  std::string split;
  std::string layer;
  double main_accuracy = 0.0;
  double control_accuracy = 0.0;
  int n_test = 0;
  double z_score = 0.0;
  Stars stars = Stars::kNone;
  ProbeHyperparams best;
};

struct ProbingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when training hits a non-finite loss.
struct TrainingDiverged : ProbingError {
  using ProbingError::ProbingError;
};

// Two-layer perceptron probe: affine(d->hidden), ReLU, affine(hidden->c).
// The second layer is stored transposed (c x hidden) so both directions run
// on contiguous rows.
class Probe {
 public:
  Probe(int in_dim, int hidden, int classes, std::uint64_t seed);

  int in_dim() const { return in_dim_; }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }

  // logits for one example; scratch must hold hidden() floats
  void logits(const float* x, float* scratch, float* out) const;
  int predict(const float* x, float* scratch) const;
  double mean_loss(const ProbeDataset& data) const;  // cross-entropy

  const std::vector<float>& w1() const { return w1_; }
  const std::vector<float>& w2t() const { return w2t_; }

  friend bool operator==(const Probe& a, const Probe& b) {
    return a.w1_ == b.w1_ && a.b1_ == b.b1_ && a.w2t_ == b.w2t_ && a.b2_ == b.b2_;
  }

  friend Probe train_probe(const ProbeDataset& train, const ProbeHyperparams& h);

 private:
  int in_dim_, hidden_, classes_;
  std::vector<float> w1_;   // in_dim x hidden
  std::vector<float> b1_;   // hidden
  std::vector<float> w2t_;  // classes x hidden
  std::vector<float> b2_;   // classes
};

// Mean over the token axis of a (tokens x d) activation; a leading batch
// axis of size 1 is squeezed first.
std::vector<float> mean_pool(const Tensor& tensor);

// Deterministic 80/20 split (train floor(0.8 n), rest test).
std::pair<ProbeDataset, ProbeDataset> split_train_test(const ProbeDataset& dataset,
                                                       std::uint64_t seed);

struct GridSearchStats {
  int config_evaluations = 0;
  int probe_fits = 0;
};

// k-fold cross-validation over the full grid; returns the configuration with
// the lowest mean validation loss, ties broken by grid order.
ProbeHyperparams grid_search_cv(const ProbeDataset& train, const HyperGrid& grid,
                                int k, int hidden_size, std::uint64_t seed,
                                GridSearchStats* stats = nullptr);

// Mini-batch gradient descent on softmax cross-entropy; deterministic
// given h.seed.
Probe train_probe(const ProbeDataset& train, const ProbeHyperparams& h);

double evaluate_probe(const Probe& probe, const ProbeDataset& test);

// Main-vs-control protocol: trains on a copy of `train` whose labels are
// uniformly permuted (test labels untouched), then evaluates on `test`.
double control_experiment(const ProbeDataset& train, const ProbeDataset& test,
                          const ProbeHyperparams& h, std::uint64_t shuffle_seed);

// One-sided pooled two-proportion z-test with equal n per arm:
//   z = (p1 - p2) / sqrt(pbar (1 - pbar) (2/n)),  pbar = (p1 + p2) / 2.
// Stars: z >= 3.090 -> ***, z >= 2.326 -> **, z >= 1.645 -> *.
Significance significance_test(double acc_main, double acc_control, int n_test);
Stars stars_for_z(double z);

struct ProbingSpec {
  std::vector<std::string> splits;  // empty -> every split in the labels file
  std::vector<std::string> layers;  // empty -> every layer in the store
  std::string model_name;           // empty -> no name filter
  HyperGrid grid;
  int k_folds = 5;
  int hidden_size = 512;
  std::uint64_t seed = 0;
};

struct LabelRow {
  std::string image_path;
  std::string prompt;
  std::string split;
  std::string label;
};
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path);

// Full pipeline per (split, layer): pooled features, 80/20 split, grid
// search, fresh main and control fits, significance verdict.
std::vector<ProbeResult> run_probing(const ActivationStore& store,
                                     const std::vector<LabelRow>& labels,
                                     const ProbingSpec& spec);

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ProbeResult>& results,
                       std::uint64_t seed);
std::vector<ProbeResult> read_results_csv(const std::filesystem::path& path);

}  // namespace tlens
