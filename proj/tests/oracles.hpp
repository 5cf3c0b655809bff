// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force numeric oracles shared by the unit and acceptance suites.
// They deliberately take different algorithmic routes than the library code
// they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tlens/geometry.hpp"

namespace tlens::testoracle {

// Eigenvalues of the explicitly formed sample covariance matrix, via classic
// two-sided Jacobi with symmetric updates. The library never forms the
// covariance; this does.
inline std::vector<double> covariance_eigenvalues(const MatrixD& emb) {
  const std::size_t n = emb.rows;
  const std::size_t d = emb.cols;
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += emb.at(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        cov[a * d + b] += (emb.at(i, a) - mean[a]) * (emb.at(i, b) - mean[b]);
      }
    }
  }
  for (double& c : cov) c /= static_cast<double>(n - 1);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += cov[p * d + q] * cov[p * d + q];
    }
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = cov[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = cov[p * d + p];
        const double aqq = cov[q * d + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          if (k == p || k == q) continue;
          const double akp = cov[k * d + p];
          const double akq = cov[k * d + q];
          cov[k * d + p] = cov[p * d + k] = c * akp - s * akq;
          cov[k * d + q] = cov[q * d + k] = s * akp + c * akq;
        }
        cov[p * d + p] = app - t * apq;
        cov[q * d + q] = aqq + t * apq;
        cov[p * d + q] = cov[q * d + p] = 0.0;
      }
    }
  }
  std::vector<double> eig(d);
  for (std::size_t j = 0; j < d; ++j) eig[j] = cov[j * d + j];
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

inline double spearman_rank_correlation(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace tlens::testoracle
