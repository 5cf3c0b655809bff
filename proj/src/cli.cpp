// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tlens/bench.hpp"
#include "tlens/config.hpp"
#include "tlens/datagen.hpp"
#include "tlens/extraction.hpp"
#include "tlens/geometry.hpp"
#include "tlens/kernels.hpp"
#include "tlens/plot.hpp"
#include "tlens/probing.hpp"
#include "tlens/store.hpp"

namespace tlens {
namespace {

std::optional<std::string> cache_dir_from_env() {
  const char* env = std::getenv("LENS_CACHE_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return std::string(env);
}

std::unique_ptr<ModelAdapter> adapter_from_config(const ExtractionConfig& cfg) {
  AdapterSpec spec;
  spec.model_path = cfg.model_path;
  spec.options = cfg.model_options;
  spec.cache_dir = cache_dir_from_env();
  return create_adapter(cfg.architecture, spec);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_modules(const std::string& config_path) {
  const ExtractionConfig cfg = parse_config(config_path);
  const auto adapter = adapter_from_config(cfg);
  for (const std::string& name : adapter->named_layers()) {
    std::cout << name << "\n";
  }
  return 0;
}

int cmd_extract(const std::string& config_path, const std::string& labels_path,
                bool log_modules_only) {
  if (log_modules_only) return cmd_modules(config_path);
  const ExtractionConfig cfg = parse_config(config_path);
  const auto adapter = adapter_from_config(cfg);

  LabelMap labels;
  if (!labels_path.empty()) {
    for (const LabelRow& row : read_labels_csv(labels_path)) {
      labels[row.image_path] = row.label;
      labels[std::filesystem::path(row.image_path).filename().string()] = row.label;
    }
  }
  ActivationStore store(cfg.resolved_output_db());
  const std::int64_t n =
      run_extraction(cfg, *adapter, store, labels.empty() ? nullptr : &labels);
  store.close();
  std::cout << "wrote " << n << " records to " << cfg.resolved_output_db().string()
            << "\n";
  return 0;
}

int cmd_probe(const std::string& db, const std::string& labels_path,
              const std::string& output, const std::string& layers_csv,
              const std::string& model, const std::string& splits_csv, int hidden,
              int folds, std::uint64_t seed, const std::string& lr_grid,
              const std::string& epoch_grid, const std::string& batch_grid) {
  ActivationStore store(db);
  const auto labels = read_labels_csv(labels_path);
  ProbingSpec spec;
  spec.layers = split_list(layers_csv);
  spec.splits = split_list(splits_csv);
  spec.model_name = model;
  spec.hidden_size = hidden;
  spec.k_folds = folds;
  spec.seed = seed;
  if (!lr_grid.empty()) {
    spec.grid.learning_rates.clear();
    for (const std::string& v : split_list(lr_grid)) {
      spec.grid.learning_rates.push_back(std::stod(v));
    }
  }
  if (!epoch_grid.empty()) {
    spec.grid.num_epochs.clear();
    for (const std::string& v : split_list(epoch_grid)) {
      spec.grid.num_epochs.push_back(std::stoi(v));
    }
  }
  if (!batch_grid.empty()) {
    spec.grid.batch_sizes.clear();
    for (const std::string& v : split_list(batch_grid)) {
      spec.grid.batch_sizes.push_back(std::stoi(v));
    }
  }
  const auto results = run_probing(store, labels, spec);
  write_results_csv(output, results, seed);
  for (const ProbeResult& r : results) {
    std::cout << r.split << " @ " << r.layer << ": main=" << r.main_accuracy
              << " control=" << r.control_accuracy << " z=" << r.z_score << " "
              << stars_label(r.stars) << "\n";
  }
  std::cout << "results written to " << output << "\n";
  return 0;
}

int cmd_concept(const std::string& db, const std::string& items_path,
                const std::string& prototype_root, const std::string& output,
                const std::string& d_sweep_csv, std::uint64_t seed) {
  ActivationStore store(db);
  const auto item_rows = read_items_csv(items_path);
  const StroopInputs inputs = load_stroop_inputs(store, item_rows, prototype_root);

  std::vector<std::size_t> sweep;
  if (!d_sweep_csv.empty()) {
    for (const std::string& v : split_list(d_sweep_csv)) {
      sweep.push_back(static_cast<std::size_t>(std::stoul(v)));
    }
  } else {
    // rank of the first layer's prototype PCA bounds the sweep
    std::size_t min_rank = SIZE_MAX;
    for (const auto& [layer, protos] : inputs.prototypes_by_layer) {
      std::size_t n = 0;
      std::size_t d = 0;
      for (const auto& [c, vecs] : protos) {
        n += vecs.size();
        if (!vecs.empty()) d = vecs.front().size();
      }
      min_rank = std::min(min_rank, std::min(n > 0 ? n - 1 : 1, d));
    }
    sweep = default_d_sweep(min_rank == SIZE_MAX ? 1 : min_rank);
  }
  const auto cells = stroop_surfaces(inputs.items, inputs.prototypes_by_layer,
                                     inputs.layers, sweep);
  write_surfaces_csv(output, cells, seed);
  std::cout << "surfaces written to " << output << " (" << cells.size() << " cells)\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& output,
              std::uint64_t seed) {
  const ExtractionConfig cfg = parse_config(config_path);
  const auto adapter = adapter_from_config(cfg);  // loading stays untimed
  ActivationStore store(cfg.resolved_output_db());
  const BenchmarkReport report = run_benchmark(*adapter, cfg, store);
  store.close();
  if (!output.empty()) write_report_json(output, report, seed);
  std::cout << format_report_table(report);
  return 0;
}

int cmd_plot(const std::string& probe_csv, const std::string& concept_csv,
             const std::string& output, std::uint64_t seed) {
  if (probe_csv.empty() == concept_csv.empty()) {
    std::cerr << "plot: pass exactly one of --probe-results or --concept-surfaces\n";
    return 2;
  }
  std::string svg;
  if (!probe_csv.empty()) {
    svg = probe_bars_svg(read_results_csv(probe_csv), seed);
  } else {
    svg = concept_surfaces_svg(read_surfaces_csv(concept_csv), seed);
  }
  write_text_file(output, svg);
  std::cout << "plot written to " << output << "\n";
  return 0;
}

int cmd_export(const std::string& db, const std::string& output) {
  export_store(db, output);
  std::cout << "exported to " << output << "\n";
  return 0;
}

int cmd_datagen(const std::string& kind, const std::string& out_dir, int count,
                std::uint64_t seed, const std::string& prompt) {
  if (kind == "probe") {
    generate_probe_dataset(out_dir, count, seed, prompt);
  } else if (kind == "stroop") {
    generate_stroop_dataset(out_dir, count, seed);
  } else if (kind == "prototypes") {
    generate_prototypes(out_dir, count, seed);
  } else {
    std::cerr << "datagen: unknown kind '" << kind
              << "' (expected probe, stroop, or prototypes)\n";
    return 2;
  }
  std::cout << "generated " << kind << " data in " << out_dir << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"tensorlens: layer activation extraction and analysis"};
  app.require_subcommand(0, 1);
  // lets the global --seed appear after a subcommand name
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string top_config;
  bool top_log_modules = false;
  app.add_option("--seed", seed, "seed for all randomized steps");
  app.add_option("--config", top_config, "run configuration (YAML)");
  app.add_flag("--log-named-modules", top_log_modules,
               "print the model's named layers and exit");

  auto* extract = app.add_subcommand("extract", "run activation extraction");
  std::string ex_config, ex_labels;
  bool ex_log_modules = false;
  extract->add_option("--config", ex_config, "run configuration (YAML)")->required();
  extract->add_option("--labels", ex_labels, "labels CSV to attach to records");
  extract->add_flag("--log-named-modules", ex_log_modules,
                    "print named layers instead of running inference");

  auto* modules = app.add_subcommand("modules", "list a model's named layers");
  std::string mod_config;
  modules->add_option("--config", mod_config, "run configuration (YAML)")->required();

  auto* probe = app.add_subcommand("probe", "train and evaluate probes");
  std::string pr_db, pr_labels, pr_output, pr_layers, pr_model, pr_splits;
  std::string pr_lr_grid, pr_epoch_grid, pr_batch_grid;
  int pr_hidden = 512;
  int pr_folds = 5;
  probe->add_option("--db", pr_db, "activation store")->required();
  probe->add_option("--labels", pr_labels, "labels CSV")->required();
  probe->add_option("--output", pr_output, "results CSV path")->required();
  probe->add_option("--layers", pr_layers, "comma-separated layer names");
  probe->add_option("--splits", pr_splits, "comma-separated split names");
  probe->add_option("--model", pr_model, "restrict to one model name");
  probe->add_option("--hidden", pr_hidden, "probe hidden size");
  probe->add_option("--folds", pr_folds, "cross-validation folds");
  probe->add_option("--lr-grid", pr_lr_grid, "3 learning rates, comma-separated");
  probe->add_option("--epochs-grid", pr_epoch_grid, "3 epoch counts, comma-separated");
  probe->add_option("--batch-grid", pr_batch_grid, "3 batch sizes, comma-separated");

  auto* concept_cmd = app.add_subcommand("concept", "concept-similarity geometry");
  std::string co_db, co_items, co_protos, co_output, co_sweep;
  concept_cmd->add_option("--db", co_db, "activation store")->required();
  concept_cmd->add_option("--items", co_items, "Stroop items CSV")->required();
  concept_cmd->add_option("--prototypes", co_protos, "prototype image root")->required();
  concept_cmd->add_option("--output", co_output, "surfaces CSV path")->required();
  concept_cmd->add_option("--d-sweep", co_sweep, "retained component counts");

  auto* bench = app.add_subcommand("bench", "measure inference time and memory");
  std::string be_config, be_output;
  bench->add_option("--config", be_config, "run configuration (YAML)")->required();
  bench->add_option("--output", be_output, "report JSON path");

  auto* plot = app.add_subcommand("plot", "render analysis plots (SVG)");
  std::string pl_probe, pl_concept, pl_output;
  plot->add_option("--probe-results", pl_probe, "probe results CSV");
  plot->add_option("--concept-surfaces", pl_concept, "concept surfaces CSV");
  plot->add_option("--output", pl_output, "SVG output path")->required();

  auto* export_cmd = app.add_subcommand("export", "dump store records as blobs + manifest");
  std::string xp_db, xp_output;
  export_cmd->add_option("--db", xp_db, "activation store")->required();
  export_cmd->add_option("--output", xp_output, "output directory")->required();

  auto* datagen = app.add_subcommand("datagen", "generate synthetic datasets");
  std::string dg_kind, dg_out;
  std::string dg_prompt = "Describe the color in this image in one word.";
  int dg_count = 20;
  datagen->add_option("--kind", dg_kind, "probe | stroop | prototypes")->required();
  datagen->add_option("--out", dg_out, "output directory")->required();
  datagen->add_option("--count", dg_count, "items per class / total items");
  datagen->add_option("--prompt", dg_prompt, "prompt recorded in labels.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex_config, ex_labels, ex_log_modules);
    if (modules->parsed()) return cmd_modules(mod_config);
    if (probe->parsed()) {
      return cmd_probe(pr_db, pr_labels, pr_output, pr_layers, pr_model, pr_splits,
                       pr_hidden, pr_folds, seed, pr_lr_grid, pr_epoch_grid,
                       pr_batch_grid);
    }
    if (concept_cmd->parsed()) {
      return cmd_concept(co_db, co_items, co_protos, co_output, co_sweep, seed);
    }
    if (bench->parsed()) return cmd_bench(be_config, be_output, seed);
    if (plot->parsed()) return cmd_plot(pl_probe, pl_concept, pl_output, seed);
    if (export_cmd->parsed()) return cmd_export(xp_db, xp_output);
    if (datagen->parsed()) return cmd_datagen(dg_kind, dg_out, dg_count, seed, dg_prompt);

    if (top_log_modules) {
      if (top_config.empty()) {
        std::cerr << "--log-named-modules requires --config\n";
        return 2;
      }
      return cmd_modules(top_config);
    }
    std::cerr << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace tlens
