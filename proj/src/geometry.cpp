// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "tlens/csvio.hpp"
#include "tlens/image.hpp"
#include "tlens/kernels.hpp"
#include "tlens/probing.hpp"

namespace tlens {

std::size_t PCAModel::rank() const {
  if (spectrum.empty()) return 0;
  const double tol = spectrum.front() * 1e-12;
  std::size_t r = 0;
  for (double s : spectrum) {
    if (s > tol) ++r;
  }
  return std::max<std::size_t>(r, 1);
}

std::vector<double> PCAModel::explained_variances() const {
  std::vector<double> v(spectrum.size());
  const double denom = sample_count > 1 ? static_cast<double>(sample_count - 1) : 1.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    v[i] = spectrum[i] * spectrum[i] / denom;
  }
  return v;
}

PCAModel fit_pca(const MatrixD& embeddings) {
  const std::size_t n = embeddings.rows;
  const std::size_t d = embeddings.cols;
  if (n < 2) throw GeometryError("pca: need at least 2 embeddings, got " + std::to_string(n));
  if (d < 1) throw GeometryError("pca: empty feature dimension");

  PCAModel model;
  model.sample_count = n;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy_f64(1.0, embeddings.row(i), model.mean.data(), d);
  }
  kernels::scale_f64(1.0 / static_cast<double>(n), model.mean.data(), d);

  // Work on the transposed centered matrix: row j of `work` is the j-th
  // column of the centered data, so Jacobi column rotations act on
  // contiguous memory.
  MatrixD work(d, n);
  double total_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = embeddings.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - model.mean[j];
      work.at(j, i) = c;
      total_sq += c * c;
    }
  }
  if (total_sq == 0.0) {
    throw GeometryError("pca: all embeddings are identical (zero variance)");
  }

  MatrixD v(d, d);
  for (std::size_t j = 0; j < d; ++j) v.at(j, j) = 1.0;

  // One-sided Jacobi: orthogonalize the columns of the centered matrix by
  // plane rotations, accumulating them into V. Singular values are the final
  // column norms; V's rows are the principal directions.
  const double eps = 1e-14;
  // columns this far below the total mass are roundoff residue of a
  // rank-deficient input; rotating them just chatters
  const double zero_tol = total_sq * 1e-26;
  const int max_sweeps = 64;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        double* up = work.row(p);
        double* uq = work.row(q);
        const double alpha = kernels::dot_f64(up, up, n);
        const double beta = kernels::dot_f64(uq, uq, n);
        if (alpha <= zero_tol || beta <= zero_tol) continue;
        const double gamma = kernels::dot_f64(up, uq, n);
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        kernels::rot_f64(up, uq, c, s, n);
        kernels::rot_f64(v.row(p), v.row(q), c, s, d);
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw GeometryError("pca: Jacobi sweep did not converge");
  }

  std::vector<double> norms(d);
  for (std::size_t j = 0; j < d; ++j) {
    norms[j] = std::sqrt(kernels::dot_f64(work.row(j), work.row(j), n));
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  model.components = MatrixD(d, d);
  model.spectrum.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    model.spectrum[j] = norms[order[j]];
    std::copy(v.row(order[j]), v.row(order[j]) + d, model.components.row(j));
  }
  return model;
}

std::vector<double> project(const std::vector<double>& x, const PCAModel& model,
                            std::size_t d_prime) {
  if (x.size() != model.dim()) {
    throw GeometryError("pca: vector dimension " + std::to_string(x.size()) +
                        " does not match model dimension " + std::to_string(model.dim()));
  }
  if (d_prime < 1 || d_prime > model.component_count()) {
    throw GeometryError("pca: d' = " + std::to_string(d_prime) +
                        " outside [1, " + std::to_string(model.component_count()) + "]");
  }
  std::vector<double> centered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - model.mean[i];
  std::vector<double> out(d_prime);
  for (std::size_t j = 0; j < d_prime; ++j) {
    out[j] = kernels::dot_f64(centered.data(), model.components.row(j), x.size());
  }
  return out;
}

double avg_cosine(const std::vector<double>& x,
                  const std::vector<std::vector<double>>& prototypes) {
  if (prototypes.empty()) throw GeometryError("geometry: empty prototype list");
  const double xn = std::sqrt(kernels::dot_f64(x.data(), x.data(), x.size()));
  if (xn == 0.0) throw GeometryError("geometry: zero vector in cosine similarity");
  double total = 0.0;
  for (const auto& p : prototypes) {
    if (p.size() != x.size()) {
      throw GeometryError("geometry: prototype dimension mismatch");
    }
    const double pn = std::sqrt(kernels::dot_f64(p.data(), p.data(), p.size()));
    if (pn == 0.0) throw GeometryError("geometry: zero prototype in cosine similarity");
    total += kernels::dot_f64(x.data(), p.data(), x.size()) / (xn * pn);
  }
  return total / static_cast<double>(prototypes.size());
}

const char* aspect_label(Aspect a) {
  switch (a) {
    case Aspect::kLexical: return "lexical";
    case Aspect::kFont: return "font";
    default: return "background";
  }
}

namespace {

const std::string& aspect_concept(const StroopItem& item, Aspect a) {
  switch (a) {
    case Aspect::kLexical: return item.lexical;
    case Aspect::kFont: return item.font;
    default: return item.background;
  }
}

}  // namespace

std::vector<std::size_t> default_d_sweep(std::size_t rank) {
  std::vector<std::size_t> sweep;
  for (std::size_t d = 1; d < rank; d *= 2) sweep.push_back(d);
  if (rank >= 1) sweep.push_back(rank);
  return sweep;
}

std::vector<SurfaceCell> stroop_surfaces(
    const std::vector<StroopItem>& items,
    const std::map<std::string, PrototypeSet>& prototypes_by_layer,
    const std::vector<std::string>& layers, const std::vector<std::size_t>& d_sweep) {
  if (items.empty()) throw GeometryError("geometry: no items");
  if (layers.empty()) throw GeometryError("geometry: no layers");
  if (d_sweep.empty()) throw GeometryError("geometry: empty d' sweep");

  std::vector<SurfaceCell> cells;
  for (const std::string& layer : layers) {
    auto pit = prototypes_by_layer.find(layer);
    if (pit == prototypes_by_layer.end()) {
      throw GeometryError("geometry: no prototypes for layer '" + layer + "'");
    }
    const PrototypeSet& protos = pit->second;
    for (const StroopItem& item : items) {
      for (Aspect a : kAllAspects) {
        if (protos.find(aspect_concept(item, a)) == protos.end()) {
          throw GeometryError("geometry: concept '" + aspect_concept(item, a) +
                              "' present in items but absent from prototypes");
        }
      }
      if (item.embedding_by_layer.find(layer) == item.embedding_by_layer.end()) {
        throw GeometryError("geometry: item '" + item.image_path +
                            "' has no embedding for layer '" + layer + "'");
      }
    }

    // PCA on the prototype embeddings only; items are projected with it.
    std::vector<const std::vector<double>*> proto_rows;
    std::vector<std::pair<std::string, std::size_t>> proto_index;  // concept, local idx
    for (const auto& [concept_name, vecs] : protos) {
      if (vecs.empty()) {
        throw GeometryError("geometry: concept '" + concept_name + "' has no prototypes");
      }
      for (std::size_t i = 0; i < vecs.size(); ++i) {
        proto_rows.push_back(&vecs[i]);
        proto_index.emplace_back(concept_name, i);
      }
    }
    const std::size_t d = proto_rows.front()->size();
    MatrixD emb(proto_rows.size(), d);
    for (std::size_t i = 0; i < proto_rows.size(); ++i) {
      if (proto_rows[i]->size() != d) {
        throw GeometryError("geometry: prototype dimensionality differs within layer '" +
                            layer + "'");
      }
      std::copy(proto_rows[i]->begin(), proto_rows[i]->end(), emb.row(i));
    }
    const PCAModel model = fit_pca(emb);

    const std::size_t d_max = *std::max_element(d_sweep.begin(), d_sweep.end());
    if (d_max > model.component_count()) {
      throw GeometryError("geometry: d' sweep exceeds component count for layer '" +
                          layer + "'");
    }

    // Project once at the largest d'; smaller d' values are prefixes because
    // component order is fixed.
    std::map<std::string, std::vector<std::vector<double>>> proj_protos;
    for (std::size_t i = 0; i < proto_rows.size(); ++i) {
      proj_protos[proto_index[i].first].push_back(project(*proto_rows[i], model, d_max));
    }
    std::vector<std::vector<double>> proj_items(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      proj_items[i] = project(items[i].embedding_by_layer.at(layer), model, d_max);
    }

    for (std::size_t dp : d_sweep) {
      auto prefix = [dp](const std::vector<double>& v) {
        return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dp));
      };
      std::map<std::string, std::vector<std::vector<double>>> protos_dp;
      for (const auto& [concept_name, vecs] : proj_protos) {
        for (const auto& v : vecs) protos_dp[concept_name].push_back(prefix(v));
      }
      for (Aspect a : kAllAspects) {
        double matched_sum = 0.0;
        double mismatched_sum = 0.0;
        for (std::size_t i = 0; i < items.size(); ++i) {
          const std::vector<double> x = prefix(proj_items[i]);
          const std::string& own = aspect_concept(items[i], a);
          matched_sum += avg_cosine(x, protos_dp.at(own));
          double other_sum = 0.0;
          std::size_t other_count = 0;
          for (const auto& [concept_name, vecs] : protos_dp) {
            if (concept_name == own) continue;
            other_sum += avg_cosine(x, vecs);
            ++other_count;
          }
          if (other_count == 0) {
            throw GeometryError("geometry: only one concept in the prototype set");
          }
          mismatched_sum += other_sum / static_cast<double>(other_count);
        }
        SurfaceCell cell;
        cell.aspect = a;
        cell.layer = layer;
        cell.d_prime = dp;
        cell.matched = matched_sum / static_cast<double>(items.size());
        cell.mismatched = mismatched_sum / static_cast<double>(items.size());
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<StroopItemRow> read_items_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_path = table.column("image_path");
  const int c_lex = table.column("lexical");
  const int c_font = table.column("font");
  const int c_bg = table.column("background");
  if (c_path < 0 || c_lex < 0 || c_font < 0 || c_bg < 0) {
    throw GeometryError(
        "geometry: items file must have columns image_path, lexical, font, background");
  }
  std::vector<StroopItemRow> rows;
  for (const auto& r : table.rows) {
    rows.push_back({r.at(c_path), r.at(c_lex), r.at(c_font), r.at(c_bg)});
  }
  return rows;
}

namespace {

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<double> pooled_f64(const StoredRecord& sr) {
  const std::vector<float> pooled = mean_pool(sr.decoded());
  return std::vector<double>(pooled.begin(), pooled.end());
}

}  // namespace

StroopInputs load_stroop_inputs(const ActivationStore& store,
                                const std::vector<StroopItemRow>& item_rows,
                                const std::filesystem::path& prototype_root) {
  StroopInputs out;
  out.layers = store.distinct_layers();
  if (out.layers.empty()) throw GeometryError("geometry: store holds no records");

  // concept = first directory component under the prototype root; duplicate
  // prototype files (identical bytes) are ingested once
  const std::string root = std::filesystem::absolute(prototype_root).lexically_normal().string();
  std::set<std::uint64_t> seen_hashes;
  std::set<std::string> dedup_skipped;
  for (const std::string& layer : out.layers) {
    QueryFilter f;
    f.layer = layer;
    std::set<std::string> seen_paths;
    for (const StoredRecord& sr : store.query(f)) {
      const std::string abs =
          std::filesystem::absolute(sr.record.image_path).lexically_normal().string();
      if (abs.size() <= root.size() || abs.compare(0, root.size(), root) != 0 ||
          abs[root.size()] != '/') {
        continue;
      }
      if (!seen_paths.insert(sr.record.image_path).second) continue;  // firing 0 only
      const std::string rel = abs.substr(root.size() + 1);
      const auto slash = rel.find('/');
      if (slash == std::string::npos) continue;
      const std::string concept_name = rel.substr(0, slash);
      if (dedup_skipped.count(sr.record.image_path)) continue;
      std::error_code ec;
      if (std::filesystem::exists(sr.record.image_path, ec) && !ec) {
        const std::uint64_t h = fnv1a(read_file_bytes(sr.record.image_path));
        // hash namespaced per layer so every layer keeps its copy
        const std::uint64_t key = h ^ std::hash<std::string>{}(layer);
        if (!seen_hashes.insert(key).second) {
          dedup_skipped.insert(sr.record.image_path);
          continue;
        }
      }
      out.prototypes_by_layer[layer][concept_name].push_back(pooled_f64(sr));
    }
  }
  if (out.prototypes_by_layer.empty()) {
    throw GeometryError("geometry: no prototype activations under " + root);
  }

  for (const StroopItemRow& row : item_rows) {
    StroopItem item;
    item.image_path = row.image_path;
    item.lexical = row.lexical;
    item.font = row.font;
    item.background = row.background;
    for (const std::string& layer : out.layers) {
      QueryFilter f;
      f.layer = layer;
      f.image_path = row.image_path;
      auto records = store.query(f);
      if (records.empty()) {
        // fall back to filename matching
        QueryFilter fl;
        fl.layer = layer;
        for (const StoredRecord& sr : store.query(fl)) {
          if (std::filesystem::path(sr.record.image_path).filename() ==
              std::filesystem::path(row.image_path).filename()) {
            records.push_back(sr);
            break;
          }
        }
      }
      if (records.empty()) {
        throw GeometryError("geometry: no activation for item '" + row.image_path +
                            "' at layer '" + layer + "'");
      }
      item.embedding_by_layer[layer] = pooled_f64(records.front());
    }
    out.items.push_back(std::move(item));
  }
  if (out.items.empty()) throw GeometryError("geometry: no Stroop items");
  return out;
}

void write_surfaces_csv(const std::filesystem::path& path,
                        const std::vector<SurfaceCell>& cells, std::uint64_t seed) {
  CsvTable table;
  table.comments.push_back("# seed=" + std::to_string(seed));
  table.header = {"aspect", "layer", "d_prime", "matched", "mismatched"};
  char buf[64];
  for (const SurfaceCell& c : cells) {
    std::vector<std::string> row;
    row.push_back(aspect_label(c.aspect));
    row.push_back(c.layer);
    row.push_back(std::to_string(c.d_prime));
    std::snprintf(buf, sizeof(buf), "%.6f", c.matched);
    row.push_back(buf);
    std::snprintf(buf, sizeof(buf), "%.6f", c.mismatched);
    row.push_back(buf);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

std::vector<SurfaceCell> read_surfaces_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_aspect = table.column("aspect");
  const int c_layer = table.column("layer");
  const int c_dp = table.column("d_prime");
  const int c_m = table.column("matched");
  const int c_mm = table.column("mismatched");
  if (c_aspect < 0 || c_layer < 0 || c_dp < 0 || c_m < 0 || c_mm < 0) {
    throw GeometryError("geometry: surfaces CSV missing required columns");
  }
  std::vector<SurfaceCell> cells;
  for (const auto& row : table.rows) {
    SurfaceCell cell;
    const std::string a = row.at(c_aspect);
    if (a == "lexical") cell.aspect = Aspect::kLexical;
    else if (a == "font") cell.aspect = Aspect::kFont;
    else if (a == "background") cell.aspect = Aspect::kBackground;
    else throw GeometryError("geometry: bad aspect '" + a + "'");
    cell.layer = row.at(c_layer);
    cell.d_prime = static_cast<std::size_t>(std::stoul(row.at(c_dp)));
    cell.matched = std::stod(row.at(c_m));
    cell.mismatched = std::stod(row.at(c_mm));
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace tlens
