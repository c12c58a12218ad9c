// Copyright 2026 The evgassom authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Brute-force reference implementations, deliberately written without
// reusing the library's computation paths: everything here is plain dense
// arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "evgassom/gassom.hpp"

namespace oracles {

// Squared projection energies via an explicit dense Gram computation.
inline std::vector<double> dense_response(const evgassom::SubspaceBank& bank,
                                          const std::vector<double>& x) {
  std::vector<double> out(static_cast<std::size_t>(bank.nodes()), 0.0);
  for (int r = 0; r < bank.nodes(); ++r) {
    long double energy = 0.0L;
    for (int h = 0; h < bank.subspace_dim(); ++h) {
      auto col = bank.basis_vector(r, h);
      long double proj = 0.0L;
      for (int d = 0; d < bank.dim(); ++d) {
        proj += static_cast<long double>(col[d]) * x[d];
      }
      energy += proj * proj;
    }
    out[r] = static_cast<double>(energy);
  }
  return out;
}

// Generic HMM forward recursion with the full R x R transition matrix
// materialized from the self-transition mixture, and explicit emission
// weights exp(kappa * response).
inline std::vector<double> hmm_forward(
    const std::vector<double>& alpha_prev, double rho, double kappa,
    const std::vector<double>& resp) {
  const std::size_t r_count = alpha_prev.size();
  std::vector<std::vector<double>> a(r_count, std::vector<double>(r_count));
  for (std::size_t c = 0; c < r_count; ++c) {
    for (std::size_t d = 0; d < r_count; ++d) {
      a[c][d] = rho / static_cast<double>(r_count) + (c == d ? 1.0 - rho : 0.0);
    }
  }
  std::vector<double> alpha(r_count, 0.0);
  for (std::size_t d = 0; d < r_count; ++d) {
    double prior = 0.0;
    for (std::size_t c = 0; c < r_count; ++c) prior += a[c][d] * alpha_prev[c];
    alpha[d] = prior * std::exp(kappa * resp[d]);
  }
  double sum = 0.0;
  for (double v : alpha) sum += v;
  for (double& v : alpha) v /= sum;
  return alpha;
}

// Projector onto span(B) through the normal equations, with a small
// Gauss-Jordan inverse of B^T B.
inline std::vector<double> span_projector(const std::vector<double>& basis,
                                          int dim, int cols) {
  std::vector<double> gram(static_cast<std::size_t>(cols) * cols, 0.0);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int d = 0; d < dim; ++d) {
        s += basis[static_cast<std::size_t>(i) * dim + d] *
             basis[static_cast<std::size_t>(j) * dim + d];
      }
      gram[static_cast<std::size_t>(i) * cols + j] = s;
    }
  }
  // invert gram in place (augmented Gauss-Jordan)
  std::vector<double> inv(static_cast<std::size_t>(cols) * cols, 0.0);
  for (int i = 0; i < cols; ++i) inv[static_cast<std::size_t>(i) * cols + i] = 1.0;
  for (int col = 0; col < cols; ++col) {
    int pivot = col;
    for (int row = col + 1; row < cols; ++row) {
      if (std::abs(gram[static_cast<std::size_t>(row) * cols + col]) >
          std::abs(gram[static_cast<std::size_t>(pivot) * cols + col])) {
        pivot = row;
      }
    }
    for (int j = 0; j < cols; ++j) {
      std::swap(gram[static_cast<std::size_t>(col) * cols + j],
                gram[static_cast<std::size_t>(pivot) * cols + j]);
      std::swap(inv[static_cast<std::size_t>(col) * cols + j],
                inv[static_cast<std::size_t>(pivot) * cols + j]);
    }
    const double diag = gram[static_cast<std::size_t>(col) * cols + col];
    for (int j = 0; j < cols; ++j) {
      gram[static_cast<std::size_t>(col) * cols + j] /= diag;
      inv[static_cast<std::size_t>(col) * cols + j] /= diag;
    }
    for (int row = 0; row < cols; ++row) {
      if (row == col) continue;
      const double factor = gram[static_cast<std::size_t>(row) * cols + col];
      for (int j = 0; j < cols; ++j) {
        gram[static_cast<std::size_t>(row) * cols + j] -=
            factor * gram[static_cast<std::size_t>(col) * cols + j];
        inv[static_cast<std::size_t>(row) * cols + j] -=
            factor * inv[static_cast<std::size_t>(col) * cols + j];
      }
    }
  }
  // P = B (B^T B)^-1 B^T
  std::vector<double> proj(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      double s = 0.0;
      for (int i = 0; i < cols; ++i) {
        for (int j = 0; j < cols; ++j) {
          s += basis[static_cast<std::size_t>(i) * dim + a] *
               inv[static_cast<std::size_t>(i) * cols + j] *
               basis[static_cast<std::size_t>(j) * dim + b];
        }
      }
      proj[static_cast<std::size_t>(a) * dim + b] = s;
    }
  }
  return proj;
}

// Projector from an orthonormal basis: B B^T.
inline std::vector<double> orthonormal_projector(
    const std::vector<double>& basis, int dim, int cols) {
  std::vector<double> proj(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      double s = 0.0;
      for (int i = 0; i < cols; ++i) {
        s += basis[static_cast<std::size_t>(i) * dim + a] *
             basis[static_cast<std::size_t>(i) * dim + b];
      }
      proj[static_cast<std::size_t>(a) * dim + b] = s;
    }
  }
  return proj;
}

// Eagerly decayed surface: per-cell values recomputed from scratch on
// every event.
class EagerSurface {
 public:
  EagerSurface(int patch_width, int num_types, double tau_f_us)
      : width_(patch_width),
        tau_(tau_f_us),
        cells_(static_cast<std::size_t>(patch_width) * patch_width *
                   num_types,
               0.0) {}

  void add(int x, int y, int type, std::uint64_t t) {
    const double decay =
        t > t_last_ ? std::exp(-static_cast<double>(t - t_last_) / tau_) : 1.0;
    for (double& c : cells_) c *= decay;
    cells_[static_cast<std::size_t>(type) * width_ * width_ +
           static_cast<std::size_t>(y) * width_ + x] += 1.0;
    t_last_ = t;
  }

  double activity() const {
    double s = 0.0;
    for (double c : cells_) s += c;
    return s;
  }

  const std::vector<double>& values() const { return cells_; }

 private:
  int width_;
  double tau_;
  std::vector<double> cells_;
  std::uint64_t t_last_ = 0;
};

// One-sample Kolmogorov-Smirnov statistic against a Uniform(lo, hi) cdf.
inline double ks_statistic(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = (samples[i] - lo) / (hi - lo);
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  return d;
}

}  // namespace oracles
