// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tlens {

// Minimal CSV with RFC-style quoting. Lines starting with '#' are treated
// as comments (used to record the run seed in output artifacts).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string csv_escape(const std::string& field);

}  // namespace tlens
