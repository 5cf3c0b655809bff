// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlens/tensor.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace tlens {

// One captured tensor with full provenance. Mirrors the store schema:
//   tensors(name, architecture, image_path, prompt, label, layer,
//           tensor_dim, tensor, dtype)
// The first eight columns are fixed, in this order; `dtype` records the
// original model precision and is appended after them.
//
// Multiple firings of one layer within a forward pass are stored as separate
// rows; insertion order (rowid) disambiguates them, firing 0 first.
struct ActivationRecord {
  std::string name;          // checkpoint identifier
  std::string architecture;  // adapter family
  std::string image_path;
  std::string prompt;
  std::optional<std::string> label;  // NULL when absent
  std::string layer;
  std::vector<std::int64_t> tensor_dim;
  std::vector<std::uint8_t> tensor;  // little-endian float32, row-major
  std::string dtype = "float32";
};

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor payload codec: little-endian IEEE-754 float32, row-major.
// decode(encode(t)) == t bitwise for all finite tensors.
std::pair<std::vector<std::int64_t>, std::vector<std::uint8_t>> encode_tensor(
    const Tensor& t, bool allow_nonfinite = false);
Tensor decode_tensor(const std::vector<std::int64_t>& dims,
                     const std::vector<std::uint8_t>& blob);

ActivationRecord make_record(std::string name, std::string architecture,
                             std::string image_path, std::string prompt,
                             std::optional<std::string> label, std::string layer,
                             const Tensor& tensor, bool allow_nonfinite = false,
                             std::string dtype = "float32");

// Writer-side interface so instrumented sinks can stand in for the store
// (the bench harness measures through this seam).
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual std::int64_t insert(const ActivationRecord& record) = 0;
  virtual void flush() {}
};

struct StoredRecord {
  std::int64_t id = 0;
  ActivationRecord record;
  Tensor decoded() const { return decode_tensor(record.tensor_dim, record.tensor); }
};

// Equality constraints; only the listed attributes are queryable.
struct QueryFilter {
  std::optional<std::string> name;
  std::optional<std::string> architecture;
  std::optional<std::string> layer;
  std::optional<std::string> label;
  std::optional<std::string> prompt;
  std::optional<std::string> image_path;
};

// Single-file SQLite store. One writer at a time; inserts are batched into
// transactions of 64 records, flushed on close.
class ActivationStore : public RecordSink {
 public:
  explicit ActivationStore(const std::filesystem::path& path);
  ~ActivationStore() override;
  ActivationStore(const ActivationStore&) = delete;
  ActivationStore& operator=(const ActivationStore&) = delete;

  // Returns the rowid; ids increase monotonically.
  std::int64_t insert(const ActivationRecord& record) override;
  void flush() override;
  void close();

  std::vector<StoredRecord> query(const QueryFilter& filter = {}) const;
  // Key/value filter form; unknown keys are an error.
  std::vector<StoredRecord> query(
      const std::vector<std::pair<std::string, std::string>>& filters) const;

  std::int64_t count() const;
  std::vector<std::string> distinct_layers() const;
  std::vector<std::string> distinct_names() const;
  std::vector<std::string> column_names() const;

  static constexpr int kTxnBatch = 64;

 private:
  void exec(const std::string& sql);
  void begin_txn_if_needed();

  sqlite3* db_ = nullptr;
  sqlite3_stmt* insert_stmt_ = nullptr;
  int pending_ = 0;
  bool in_txn_ = false;
};

// Dumps every record as a raw blob file plus a JSON manifest describing them.
void export_store(const std::filesystem::path& db_path,
                  const std::filesystem::path& out_dir);

}  // namespace tlens
