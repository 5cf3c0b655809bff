// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <sqlite3.h>

#include <nlohmann/json.hpp>

namespace tlens {
namespace {

static_assert(sizeof(float) == 4, "float32 storage requires 4-byte float");

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap32(v);
  }
}

std::vector<std::int64_t> parse_dims(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array()) throw StoreError("store: tensor_dim is not a JSON array");
  std::vector<std::int64_t> dims;
  for (const auto& v : j) dims.push_back(v.get<std::int64_t>());
  return dims;
}

void check_blob_invariant(const std::vector<std::int64_t>& dims,
                          std::size_t blob_bytes) {
  const std::int64_t n = Tensor::numel_of(dims);
  if (static_cast<std::size_t>(n) * sizeof(float) != blob_bytes) {
    throw StoreError("store: tensor_dim " + dims_to_string(dims) + " implies " +
                     std::to_string(n * sizeof(float)) + " bytes but blob has " +
                     std::to_string(blob_bytes));
  }
}

}  // namespace

std::pair<std::vector<std::int64_t>, std::vector<std::uint8_t>> encode_tensor(
    const Tensor& t, bool allow_nonfinite) {
  if (!allow_nonfinite) {
    for (float v : t.data) {
      if (!std::isfinite(v)) {
        throw StoreError("store: refusing to encode non-finite tensor value "
                         "(set allow_nonfinite to override)");
      }
    }
  }
  std::vector<std::uint8_t> blob(t.data.size() * sizeof(float));
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &t.data[i], 4);
    bits = to_le(bits);
    std::memcpy(blob.data() + 4 * i, &bits, 4);
  }
  return {t.dims, std::move(blob)};
}

Tensor decode_tensor(const std::vector<std::int64_t>& dims,
                     const std::vector<std::uint8_t>& blob) {
  check_blob_invariant(dims, blob.size());
  std::vector<float> data(blob.size() / sizeof(float));
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, blob.data() + 4 * i, 4);
    bits = to_le(bits);
    std::memcpy(&data[i], &bits, 4);
  }
  return Tensor(dims, std::move(data));
}

ActivationRecord make_record(std::string name, std::string architecture,
                             std::string image_path, std::string prompt,
                             std::optional<std::string> label, std::string layer,
                             const Tensor& tensor, bool allow_nonfinite,
                             std::string dtype) {
  auto [dims, blob] = encode_tensor(tensor, allow_nonfinite);
  ActivationRecord rec;
  rec.name = std::move(name);
  rec.architecture = std::move(architecture);
  rec.image_path = std::move(image_path);
  rec.prompt = std::move(prompt);
  rec.label = std::move(label);
  rec.layer = std::move(layer);
  rec.tensor_dim = std::move(dims);
  rec.tensor = std::move(blob);
  rec.dtype = std::move(dtype);
  return rec;
}

ActivationStore::ActivationStore(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  if (sqlite3_open(path.string().c_str(), &db_) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    throw StoreError("store: cannot open " + path.string() + ": " + msg);
  }
  exec(
      "CREATE TABLE IF NOT EXISTS tensors ("
      "name TEXT, architecture TEXT, image_path TEXT, prompt TEXT, "
      "label TEXT, layer TEXT, tensor_dim TEXT, tensor BLOB, dtype TEXT)");
  const char* sql =
      "INSERT INTO tensors (name, architecture, image_path, prompt, label, "
      "layer, tensor_dim, tensor, dtype) VALUES (?,?,?,?,?,?,?,?,?)";
  if (sqlite3_prepare_v2(db_, sql, -1, &insert_stmt_, nullptr) != SQLITE_OK) {
    throw StoreError(std::string("store: prepare failed: ") + sqlite3_errmsg(db_));
  }
}

ActivationStore::~ActivationStore() {
  try {
    close();
  } catch (...) {
  }
}

void ActivationStore::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StoreError("store: " + msg);
  }
}

void ActivationStore::begin_txn_if_needed() {
  if (!in_txn_) {
    exec("BEGIN");
    in_txn_ = true;
  }
}

std::int64_t ActivationStore::insert(const ActivationRecord& record) {
  if (db_ == nullptr) throw StoreError("store: insert on closed store");
  check_blob_invariant(record.tensor_dim, record.tensor.size());
  begin_txn_if_needed();

  sqlite3_reset(insert_stmt_);
  sqlite3_clear_bindings(insert_stmt_);
  sqlite3_bind_text(insert_stmt_, 1, record.name.c_str(), -1, SQLITE_TRANSIENT);
  sqlite3_bind_text(insert_stmt_, 2, record.architecture.c_str(), -1, SQLITE_TRANSIENT);
  sqlite3_bind_text(insert_stmt_, 3, record.image_path.c_str(), -1, SQLITE_TRANSIENT);
  sqlite3_bind_text(insert_stmt_, 4, record.prompt.c_str(), -1, SQLITE_TRANSIENT);
  if (record.label) {
    sqlite3_bind_text(insert_stmt_, 5, record.label->c_str(), -1, SQLITE_TRANSIENT);
  } else {
    sqlite3_bind_null(insert_stmt_, 5);
  }
  sqlite3_bind_text(insert_stmt_, 6, record.layer.c_str(), -1, SQLITE_TRANSIENT);
  const std::string dims = dims_to_string(record.tensor_dim);
  sqlite3_bind_text(insert_stmt_, 7, dims.c_str(), -1, SQLITE_TRANSIENT);
  sqlite3_bind_blob64(insert_stmt_, 8, record.tensor.data(), record.tensor.size(),
                      SQLITE_TRANSIENT);
  sqlite3_bind_text(insert_stmt_, 9, record.dtype.c_str(), -1, SQLITE_TRANSIENT);

  if (sqlite3_step(insert_stmt_) != SQLITE_DONE) {
    throw StoreError(std::string("store: insert failed: ") + sqlite3_errmsg(db_));
  }
  const std::int64_t id = sqlite3_last_insert_rowid(db_);
  if (++pending_ >= kTxnBatch) flush();
  return id;
}

void ActivationStore::flush() {
  if (db_ != nullptr && in_txn_) {
    exec("COMMIT");
    in_txn_ = false;
    pending_ = 0;
  }
}

void ActivationStore::close() {
  if (db_ == nullptr) return;
  flush();
  if (insert_stmt_ != nullptr) {
    sqlite3_finalize(insert_stmt_);
    insert_stmt_ = nullptr;
  }
  sqlite3_close(db_);
  db_ = nullptr;
}

std::vector<StoredRecord> ActivationStore::query(const QueryFilter& filter) const {
  if (db_ == nullptr) throw StoreError("store: query on closed store");
  // flush pending writes so the reader sees them
  const_cast<ActivationStore*>(this)->flush();

  std::string sql =
      "SELECT rowid, name, architecture, image_path, prompt, label, layer, "
      "tensor_dim, tensor, dtype FROM tensors";
  std::vector<std::string> clauses;
  std::vector<const std::string*> binds;
  auto add = [&](const char* col, const std::optional<std::string>& v) {
    if (v) {
      clauses.push_back(std::string(col) + " = ?");
      binds.push_back(&*v);
    }
  };
  add("name", filter.name);
  add("architecture", filter.architecture);
  add("layer", filter.layer);
  add("label", filter.label);
  add("prompt", filter.prompt);
  add("image_path", filter.image_path);
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    sql += (i == 0 ? " WHERE " : " AND ") + clauses[i];
  }
  sql += " ORDER BY rowid";

  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    throw StoreError(std::string("store: query prepare failed: ") + sqlite3_errmsg(db_));
  }
  for (std::size_t i = 0; i < binds.size(); ++i) {
    sqlite3_bind_text(stmt, static_cast<int>(i + 1), binds[i]->c_str(), -1,
                      SQLITE_TRANSIENT);
  }

  std::vector<StoredRecord> out;
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    StoredRecord sr;
    sr.id = sqlite3_column_int64(stmt, 0);
    auto text = [&](int col) {
      const unsigned char* t = sqlite3_column_text(stmt, col);
      return t ? std::string(reinterpret_cast<const char*>(t)) : std::string();
    };
    sr.record.name = text(1);
    sr.record.architecture = text(2);
    sr.record.image_path = text(3);
    sr.record.prompt = text(4);
    if (sqlite3_column_type(stmt, 5) != SQLITE_NULL) sr.record.label = text(5);
    sr.record.layer = text(6);
    sr.record.tensor_dim = parse_dims(text(7));
    const void* blob = sqlite3_column_blob(stmt, 8);
    const int blob_len = sqlite3_column_bytes(stmt, 8);
    sr.record.tensor.assign(static_cast<const std::uint8_t*>(blob),
                            static_cast<const std::uint8_t*>(blob) + blob_len);
    sr.record.dtype = text(9);
    out.push_back(std::move(sr));
  }
  sqlite3_finalize(stmt);
  if (rc != SQLITE_DONE) {
    throw StoreError(std::string("store: query failed: ") + sqlite3_errmsg(db_));
  }
  return out;
}

std::vector<StoredRecord> ActivationStore::query(
    const std::vector<std::pair<std::string, std::string>>& filters) const {
  QueryFilter f;
  for (const auto& [key, value] : filters) {
    if (key == "name") {
      f.name = value;
    } else if (key == "architecture") {
      f.architecture = value;
    } else if (key == "layer") {
      f.layer = value;
    } else if (key == "label") {
      f.label = value;
    } else if (key == "prompt") {
      f.prompt = value;
    } else if (key == "image_path") {
      f.image_path = value;
    } else {
      throw StoreError("store: unknown filter key '" + key +
                       "' (queryable: name, architecture, layer, label, prompt, "
                       "image_path)");
    }
  }
  return query(f);
}

std::int64_t ActivationStore::count() const {
  return static_cast<std::int64_t>(query().size());
}

namespace {
std::vector<std::string> distinct_column(sqlite3* db, const char* col) {
  std::string sql = std::string("SELECT DISTINCT ") + col +
                    " FROM tensors ORDER BY rowid";
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    throw StoreError(std::string("store: query failed: ") + sqlite3_errmsg(db));
  }
  std::vector<std::string> out;
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    const unsigned char* t = sqlite3_column_text(stmt, 0);
    if (t) out.emplace_back(reinterpret_cast<const char*>(t));
  }
  sqlite3_finalize(stmt);
  return out;
}
}  // namespace

std::vector<std::string> ActivationStore::distinct_layers() const {
  const_cast<ActivationStore*>(this)->flush();
  return distinct_column(db_, "layer");
}

std::vector<std::string> ActivationStore::distinct_names() const {
  const_cast<ActivationStore*>(this)->flush();
  return distinct_column(db_, "name");
}

std::vector<std::string> ActivationStore::column_names() const {
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, "PRAGMA table_info(tensors)", -1, &stmt, nullptr) !=
      SQLITE_OK) {
    throw StoreError(std::string("store: pragma failed: ") + sqlite3_errmsg(db_));
  }
  std::vector<std::string> cols;
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    cols.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 1)));
  }
  sqlite3_finalize(stmt);
  return cols;
}

void export_store(const std::filesystem::path& db_path,
                  const std::filesystem::path& out_dir) {
  ActivationStore store(db_path);
  std::filesystem::create_directories(out_dir);
  nlohmann::json manifest = nlohmann::json::array();
  for (const StoredRecord& sr : store.query()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tensor_%06lld.bin",
                  static_cast<long long>(sr.id));
    const std::string blob_file = buf;
    std::ofstream out(out_dir / blob_file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(sr.record.tensor.data()),
              static_cast<std::streamsize>(sr.record.tensor.size()));
    nlohmann::json entry = {
        {"id", sr.id},
        {"name", sr.record.name},
        {"architecture", sr.record.architecture},
        {"image_path", sr.record.image_path},
        {"prompt", sr.record.prompt},
        {"layer", sr.record.layer},
        {"tensor_dim", sr.record.tensor_dim},
        {"dtype", sr.record.dtype},
        {"blob", blob_file},
        {"byte_length", sr.record.tensor.size()},
    };
    if (sr.record.label) {
      entry["label"] = *sr.record.label;
    } else {
      entry["label"] = nullptr;
    }
    manifest.push_back(std::move(entry));
  }
  std::ofstream mout(out_dir / "manifest.json", std::ios::trunc);
  mout << manifest.dump(2) << "\n";
}

}  // namespace tlens
