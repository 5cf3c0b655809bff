// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

// Data-parallel inner loops used by the adapters, the probing trainer and the
// PCA routines. Every operation has a scalar reference kernel and, on x86-64,
// an AVX2/FMA variant selected at runtime. The two are equivalence-tested
// against each other; callers always go through the dispatched entry points.
//
// Selection order: LENS_KERNELS env var ("scalar" | "avx2" | "auto"), then
// CPUID. force_backend() exists for tests.

namespace tlens::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  float (*dot_f32)(const float*, const float*, std::size_t);
  void (*axpy_f32)(float, const float*, float*, std::size_t);  // y += a*x
  void (*scale_f32)(float, float*, std::size_t);
  float (*sum_f32)(const float*, std::size_t);
  void (*relu_f32)(float*, std::size_t);
  // grad[i] = act[i] > 0 ? grad[i] : 0
  void (*relu_grad_f32)(const float*, float*, std::size_t);
  double (*dot_f64)(const double*, const double*, std::size_t);
  void (*axpy_f64)(double, const double*, double*, std::size_t);
  void (*scale_f64)(double, double*, std::size_t);
  // Givens rotation: (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rot_f64)(double*, double*, double, double, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in / unsupported

Backend active_backend();
const char* backend_name(Backend b);
const char* active_backend_name();
bool avx2_available();
void force_backend(Backend b);  // throws if the backend is unavailable
void reset_backend();           // back to env/CPUID autodetection

// Dispatched entry points.
float dot_f32(const float* a, const float* b, std::size_t n);
void axpy_f32(float a, const float* x, float* y, std::size_t n);
void scale_f32(float a, float* x, std::size_t n);
float sum_f32(const float* x, std::size_t n);
void relu_f32(float* x, std::size_t n);
void relu_grad_f32(const float* act, float* grad, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double a, const double* x, double* y, std::size_t n);
void scale_f64(double a, double* x, std::size_t n);
void rot_f64(double* x, double* y, double c, double s, std::size_t n);

}  // namespace tlens::kernels
