// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlens {

// Dense row-major float32 tensor with explicit shape. This is the unit of
// capture and storage; analyses pull rows/planes out of it as needed.
struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::int64_t> d, std::vector<float> v)
      : dims(std::move(d)), data(std::move(v)) {
    if (numel_of(dims) != static_cast<std::int64_t>(data.size())) {
      throw std::invalid_argument("Tensor: shape does not match element count");
    }
  }

  static std::int64_t numel_of(const std::vector<std::int64_t>& dims) {
    std::int64_t n = 1;
    for (std::int64_t d : dims) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<std::int64_t> d) {
    std::int64_t n = numel_of(d);
    return Tensor(std::move(d), std::vector<float>(static_cast<std::size_t>(n), 0.0f));
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(dims.size()); }

  // rank-2 helpers
  std::int64_t rows() const { return dims.at(0); }
  std::int64_t cols() const { return dims.at(1); }
  float* row(std::int64_t r) { return data.data() + r * cols(); }
  const float* row(std::int64_t r) const { return data.data() + r * cols(); }

  float& at2(std::int64_t r, std::int64_t c) { return data[r * cols() + c]; }
  float at2(std::int64_t r, std::int64_t c) const { return data[r * cols() + c]; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims == b.dims && a.data == b.data;
  }
};

inline std::string dims_to_string(const std::vector<std::int64_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(dims[i]);
  }
  s += "]";
  return s;
}

}  // namespace tlens
