// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "tlens/kernels.hpp"
#include "tlens/rng.hpp"

namespace k = tlens::kernels;

namespace {

std::vector<float> random_f32(std::size_t n, tlens::Rng& rng) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(-2.0, 2.0));
  return v;
}

std::vector<double> random_f64(std::size_t n, tlens::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// sizes chosen to exercise the SIMD main loops and the scalar tails
const std::size_t kSizes[] = {0, 1, 3, 7, 8, 9, 16, 17, 64, 100, 513, 1000};

}  // namespace

TEST_CASE("scalar and AVX2 kernels are equivalent") {
  if (!k::avx2_available()) {
    MESSAGE("AVX2 unavailable; dispatch equivalence trivially holds");
    return;
  }
  const k::KernelTable& s = k::scalar_table();
  const k::KernelTable& v = *k::avx2_table();
  tlens::Rng rng(42);

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    auto a = random_f32(n, rng);
    auto b = random_f32(n, rng);

    const float ds = s.dot_f32(a.data(), b.data(), n);
    const float dv = v.dot_f32(a.data(), b.data(), n);
    CHECK(std::abs(ds - dv) <= 1e-4f * (1.0f + std::abs(ds)));

    const float ss = s.sum_f32(a.data(), n);
    const float sv = v.sum_f32(a.data(), n);
    CHECK(std::abs(ss - sv) <= 1e-4f * (1.0f + std::abs(ss)));

    auto ys = b;
    auto yv = b;
    s.axpy_f32(1.5f, a.data(), ys.data(), n);
    v.axpy_f32(1.5f, a.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(ys[i] - yv[i]) <= 1e-5f * (1.0f + std::abs(ys[i])));
    }

    auto rs = a;
    auto rv = a;
    s.relu_f32(rs.data(), n);
    v.relu_f32(rv.data(), n);
    CHECK(rs == rv);  // elementwise max is exact

    auto gs = b;
    auto gv = b;
    s.relu_grad_f32(a.data(), gs.data(), n);
    v.relu_grad_f32(a.data(), gv.data(), n);
    CHECK(gs == gv);

    auto xs = a;
    auto xv = a;
    s.scale_f32(0.3f, xs.data(), n);
    v.scale_f32(0.3f, xv.data(), n);
    CHECK(xs == xv);  // single multiply per element, identical rounding

    auto da = random_f64(n, rng);
    auto db = random_f64(n, rng);
    const double dds = s.dot_f64(da.data(), db.data(), n);
    const double ddv = v.dot_f64(da.data(), db.data(), n);
    CHECK(std::abs(dds - ddv) <= 1e-12 * (1.0 + std::abs(dds)));

    auto dys = db;
    auto dyv = db;
    s.axpy_f64(0.7, da.data(), dys.data(), n);
    v.axpy_f64(0.7, da.data(), dyv.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(dys[i] - dyv[i]) <= 1e-14 * (1.0 + std::abs(dys[i])));
    }

    auto rxs = da;
    auto rys2 = db;
    auto rxv = da;
    auto ryv2 = db;
    const double c = std::cos(0.83);
    const double sn = std::sin(0.83);
    s.rot_f64(rxs.data(), rys2.data(), c, sn, n);
    v.rot_f64(rxv.data(), ryv2.data(), c, sn, n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(rxs[i] - rxv[i]) <= 1e-14 * (1.0 + std::abs(rxs[i])));
      CHECK(std::abs(rys2[i] - ryv2[i]) <= 1e-14 * (1.0 + std::abs(rys2[i])));
    }
  }
}

TEST_CASE("kernel dispatch honors forced backend") {
  const k::Backend original = k::active_backend();
  k::force_backend(k::Backend::kScalar);
  CHECK(k::active_backend() == k::Backend::kScalar);
  CHECK(std::string(k::active_backend_name()) == "scalar");
  if (k::avx2_available()) {
    k::force_backend(k::Backend::kAvx2);
    CHECK(k::active_backend() == k::Backend::kAvx2);
  }
  k::force_backend(original);
  CHECK(k::active_backend() == original);
}

TEST_CASE("dot against a long-double reference") {
  tlens::Rng rng(7);
  const std::size_t n = 257;
  auto a = random_f32(n, rng);
  auto b = random_f32(n, rng);
  long double ref = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    ref += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  }
  const float got = k::dot_f32(a.data(), b.data(), n);
  CHECK(std::abs(static_cast<double>(got - static_cast<float>(ref))) <=
        1e-3 * (1.0 + std::abs(static_cast<double>(ref))));
}

TEST_CASE("rotation preserves two-column norms") {
  tlens::Rng rng(11);
  const std::size_t n = 33;
  auto x = random_f64(n, rng);
  auto y = random_f64(n, rng);
  const double before = k::dot_f64(x.data(), x.data(), n) + k::dot_f64(y.data(), y.data(), n);
  const double theta = 0.37;
  k::rot_f64(x.data(), y.data(), std::cos(theta), std::sin(theta), n);
  const double after = k::dot_f64(x.data(), x.data(), n) + k::dot_f64(y.data(), y.data(), n);
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}
