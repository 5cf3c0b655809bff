// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tlens::kernels {
namespace {

#if !defined(TLENS_AVX2_TU)
// No AVX2 TU compiled in (non-x86 build): resolve the weak reference here.
#define TLENS_NO_AVX2_TABLE 1
#endif

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Dispatch {
  const KernelTable* table;
  Backend backend;
};

Dispatch autodetect() {
  const char* env = std::getenv("LENS_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) {
    return {&scalar_table(), Backend::kScalar};
  }
  const bool want_avx2 = env == nullptr || std::strcmp(env, "auto") == 0 ||
                         std::strcmp(env, "avx2") == 0;
  if (want_avx2 && cpu_has_avx2_fma()) {
    if (const KernelTable* t = avx2_table()) return {t, Backend::kAvx2};
  }
  return {&scalar_table(), Backend::kScalar};
}

Dispatch& dispatch() {
  static Dispatch d = autodetect();
  return d;
}

}  // namespace

#if defined(TLENS_NO_AVX2_TABLE)
const KernelTable* avx2_table() { return nullptr; }
#endif

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

const char* active_backend_name() { return backend_name(active_backend()); }

bool avx2_available() { return cpu_has_avx2_fma() && avx2_table() != nullptr; }

void force_backend(Backend b) {
  if (b == Backend::kAvx2) {
    if (!avx2_available()) {
      throw std::runtime_error("kernels: avx2 backend unavailable on this host");
    }
    dispatch() = {avx2_table(), Backend::kAvx2};
    return;
  }
  dispatch() = {&scalar_table(), Backend::kScalar};
}

void reset_backend() { dispatch() = autodetect(); }

float dot_f32(const float* a, const float* b, std::size_t n) {
  return dispatch().table->dot_f32(a, b, n);
}
void axpy_f32(float a, const float* x, float* y, std::size_t n) {
  dispatch().table->axpy_f32(a, x, y, n);
}
void scale_f32(float a, float* x, std::size_t n) {
  dispatch().table->scale_f32(a, x, n);
}
float sum_f32(const float* x, std::size_t n) {
  return dispatch().table->sum_f32(x, n);
}
void relu_f32(float* x, std::size_t n) { dispatch().table->relu_f32(x, n); }
void relu_grad_f32(const float* act, float* grad, std::size_t n) {
  dispatch().table->relu_grad_f32(act, grad, n);
}
double dot_f64(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot_f64(a, b, n);
}
void axpy_f64(double a, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy_f64(a, x, y, n);
}
void scale_f64(double a, double* x, std::size_t n) {
  dispatch().table->scale_f64(a, x, n);
}
void rot_f64(double* x, double* y, double c, double s, std::size_t n) {
  dispatch().table->rot_f64(x, y, c, s, n);
}

}  // namespace tlens::kernels
