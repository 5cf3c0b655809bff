// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

// Scalar reference kernels. These define the semantics the SIMD variants
// must reproduce (up to reassociation of floating-point sums).

#include "tlens/kernels.hpp"

namespace tlens::kernels {
namespace {

float s_dot_f32(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void s_axpy_f32(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale_f32(float a, float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

float s_sum_f32(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void s_relu_f32(float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void s_relu_grad_f32(const float* act, float* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(act[i] > 0.0f)) grad[i] = 0.0f;
  }
}

double s_dot_f64(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void s_axpy_f64(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale_f64(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_rot_f64(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      s_dot_f32, s_axpy_f32, s_scale_f32, s_sum_f32,  s_relu_f32,
      s_relu_grad_f32, s_dot_f64,  s_axpy_f64,  s_scale_f64, s_rot_f64,
  };
  return table;
}

}  // namespace tlens::kernels
