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

#include "evgassom/gassom.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "evgassom/crc32.hpp"
#include "evgassom/rng.hpp"

namespace evgassom {

namespace {

constexpr double kResidualFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

int exact_square_root(int n) {
  int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  while (side * side > n) --side;
  while ((side + 1) * (side + 1) <= n) ++side;
  return side * side == n ? side : -1;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    v >>= 8;
  }
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

SubspaceBank::SubspaceBank(int num_nodes, int dim, int subspace_dim)
    : nodes_(num_nodes), dim_(dim), subspace_dim_(subspace_dim) {
  if (num_nodes < 1 || dim < 1 || subspace_dim < 1) {
    fail(errc::invalid_argument, "bank shape fields must be >= 1");
  }
  if (subspace_dim > dim) {
    fail(errc::h_exceeds_d, "subspace dimension " +
                                std::to_string(subspace_dim) +
                                " exceeds input dimension " +
                                std::to_string(dim));
  }
  side_ = exact_square_root(num_nodes);
  if (side_ < 0) {
    fail(errc::not_perfect_square,
         std::to_string(num_nodes) + " nodes cannot form a square lattice");
  }
  data_.assign(static_cast<std::size_t>(num_nodes) * subspace_dim * dim, 0.0);
}

std::vector<std::uint8_t> SubspaceBank::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(20 + data_.size() * 8 + 4);
  for (std::uint8_t m : {0x47, 0x53, 0x42, 0x31}) out.push_back(m);  // "GSB1"
  put_u32(out, static_cast<std::uint32_t>(nodes_));
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u32(out, static_cast<std::uint32_t>(subspace_dim_));
  put_u32(out, static_cast<std::uint32_t>(side_));
  for (double v : data_) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>(bits & 0xFF));
      bits >>= 8;
    }
  }
  put_u32(out, crc32(out));
  return out;
}

SubspaceBank SubspaceBank::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 0x47 || bytes[1] != 0x53 ||
      bytes[2] != 0x42 || bytes[3] != 0x31) {
    fail_at(errc::bad_magic, "expected GSB1 magic", 0);
  }
  if (bytes.size() < 24) {
    fail_at(errc::truncated_record, "bank header cut short", bytes.size());
  }
  const std::uint32_t nodes = read_u32(bytes.data() + 4);
  const std::uint32_t dim = read_u32(bytes.data() + 8);
  const std::uint32_t subspace_dim = read_u32(bytes.data() + 12);
  const std::uint32_t side = read_u32(bytes.data() + 16);
  const std::size_t payload =
      static_cast<std::size_t>(nodes) * subspace_dim * dim * 8;
  if (bytes.size() != 20 + payload + 4) {
    fail_at(errc::truncated_record, "bank payload size mismatch",
            bytes.size());
  }
  const std::uint32_t stored_crc = read_u32(bytes.data() + bytes.size() - 4);
  const std::uint32_t actual_crc = crc32(bytes.first(bytes.size() - 4));
  if (stored_crc != actual_crc) {
    fail_at(errc::checksum_mismatch, "bank CRC32 does not match",
            bytes.size() - 4);
  }
  SubspaceBank bank(static_cast<int>(nodes), static_cast<int>(dim),
                    static_cast<int>(subspace_dim));
  if (bank.side_ != static_cast<int>(side)) {
    fail(errc::bad_config, "stored lattice side " + std::to_string(side) +
                               " inconsistent with node count");
  }
  const std::uint8_t* p = bytes.data() + 20;
  for (double& v : bank.data_) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    v = std::bit_cast<double>(bits);
    p += 8;
  }
  return bank;
}

LatentPosterior LatentPosterior::uniform(int num_nodes) {
  LatentPosterior p;
  p.gamma.assign(static_cast<std::size_t>(num_nodes),
                 1.0 / static_cast<double>(num_nodes));
  return p;
}

void LatentPosterior::reset_uniform() {
  const double u = 1.0 / static_cast<double>(gamma.size());
  for (double& g : gamma) g = u;
}

SubspaceBank init_bank(int num_nodes, int dim, int subspace_dim,
                       std::uint64_t seed) {
  SubspaceBank bank(num_nodes, dim, subspace_dim);
  Rng rng(seed);
  for (int r = 0; r < num_nodes; ++r) {
    auto b = bank.basis(r);
    for (double& v : b) v = rng.normal();
    orthonormalize(b, dim, subspace_dim);
  }
  return bank;
}

void orthonormalize(std::span<double> basis, int dim, int subspace_dim) {
  for (int h = 0; h < subspace_dim; ++h) {
    double* col = basis.data() + static_cast<std::size_t>(h) * dim;
    for (int j = 0; j < h; ++j) {
      const double* prev = basis.data() + static_cast<std::size_t>(j) * dim;
      double proj = 0.0;
      for (int d = 0; d < dim; ++d) proj += prev[d] * col[d];
      for (int d = 0; d < dim; ++d) col[d] -= proj * prev[d];
    }
    double sq = 0.0;
    for (int d = 0; d < dim; ++d) sq += col[d] * col[d];
    const double norm = std::sqrt(sq);
    if (norm < kResidualFloor) {
      fail(errc::rank_deficient,
           "basis column " + std::to_string(h) + " is linearly dependent");
    }
    const double inv = 1.0 / norm;
    for (int d = 0; d < dim; ++d) col[d] *= inv;
  }
}

void response(const SubspaceBank& bank, std::span<const double> x,
              std::span<double> out) {
  const int h_count = bank.subspace_dim();
  const int dim = bank.dim();
  for (int r = 0; r < bank.nodes(); ++r) {
    const double* b = bank.basis(r).data();
    double energy = 0.0;
    for (int h = 0; h < h_count; ++h) {
      const double* col = b + static_cast<std::size_t>(h) * dim;
      double proj = 0.0;
      for (int d = 0; d < dim; ++d) proj += col[d] * x[d];
      energy += proj * proj;
    }
    out[r] = energy;
  }
}

std::vector<double> response(const SubspaceBank& bank,
                             std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(bank.nodes()));
  response(bank, x, out);
  return out;
}

int classify_event(const SubspaceBank& bank, std::span<const double> x) {
  std::vector<double> resp = response(bank, x);
  int best = 0;
  for (int r = 1; r < bank.nodes(); ++r) {
    if (resp[r] > resp[best]) best = r;
  }
  return best;
}

double transition_mix(std::uint64_t t, std::uint64_t t_prev, double tau_s_us) {
  if (t < t_prev) {
    fail(errc::timestamp_regression,
         "output event at t=" + std::to_string(t) + " before t_prev=" +
             std::to_string(t_prev));
  }
  if (tau_s_us <= 0.0) fail(errc::invalid_argument, "tau_s must be positive");
  return 1.0 - std::exp(-static_cast<double>(t - t_prev) / tau_s_us);
}

void forward_step_inplace(std::span<const double> resp, double rho,
                          const EmissionModel& emission,
                          std::vector<double>& gamma) {
  const std::size_t r_count = gamma.size();
  const double uniform = rho / static_cast<double>(r_count);
  const double keep = 1.0 - rho;
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < r_count; ++r) {
    const double prior = uniform + keep * gamma[r];
    const double log_unnorm = std::log(prior) + emission.kappa * resp[r];
    gamma[r] = log_unnorm;
    if (log_unnorm > max_log) max_log = log_unnorm;
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < r_count; ++r) {
    gamma[r] = std::exp(gamma[r] - max_log);
    sum += gamma[r];
  }
  if (!(sum > 0.0)) {
    fail(errc::numerical_underflow, "forward normalizer vanished");
  }
  const double inv = 1.0 / sum;
  for (double& g : gamma) g *= inv;
}

LatentPosterior forward_step(const SubspaceBank& bank,
                             const LatentPosterior& previous,
                             std::span<const double> x, double rho,
                             const EmissionModel& emission) {
  if (static_cast<int>(previous.gamma.size()) != bank.nodes()) {
    fail(errc::length_mismatch, "posterior length does not match bank");
  }
  LatentPosterior next = previous;
  std::vector<double> resp = response(bank, x);
  forward_step_inplace(resp, rho, emission, next.gamma);
  return next;
}

NeighborhoodMatrix neighborhood_matrix(const SubspaceBank& bank,
                                       double sigma) {
  if (!(sigma > 0.0)) fail(errc::invalid_argument, "sigma must be positive");
  const int r_count = bank.nodes();
  NeighborhoodMatrix g;
  g.nodes = r_count;
  g.sigma = sigma;
  g.weights.resize(static_cast<std::size_t>(r_count) * r_count);
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  for (int n = 0; n < r_count; ++n) {
    auto [nx, ny] = bank.lattice_position(n);
    double row_sum = 0.0;
    double* row = g.weights.data() + static_cast<std::size_t>(n) * r_count;
    for (int m = 0; m < r_count; ++m) {
      auto [mx, my] = bank.lattice_position(m);
      const double dx = mx - nx;
      const double dy = my - ny;
      row[m] = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
      row_sum += row[m];
    }
    const double inv = 1.0 / row_sum;
    for (int m = 0; m < r_count; ++m) row[m] *= inv;
  }
  return g;
}

void update_step(SubspaceBank& bank, std::span<const double> x,
                 std::span<const double> gamma, const NeighborhoodMatrix& g,
                 double learning_rate) {
  const int r_count = bank.nodes();
  const int dim = bank.dim();
  const int h_count = bank.subspace_dim();
  if (static_cast<int>(gamma.size()) != r_count || g.nodes != r_count) {
    fail(errc::length_mismatch, "gamma/neighborhood size does not match bank");
  }
  if (!(learning_rate > 0.0)) {
    fail(errc::invalid_argument, "learning rate must be positive");
  }

  int winner = 0;
  for (int r = 1; r < r_count; ++r) {
    if (gamma[r] > gamma[winner]) winner = r;
  }

  double x_norm_sq = 0.0;
  for (double v : x) x_norm_sq += v * v;
  const double x_norm = std::sqrt(x_norm_sq);

  std::vector<double> proj(static_cast<std::size_t>(h_count));
  std::vector<double> residual(static_cast<std::size_t>(dim));

  for (int r = 0; r < r_count; ++r) {
    const double hr = g.at(r, winner);
    if (hr == 0.0) continue;
    double* b = bank.basis(r).data();
    double proj_sq = 0.0;
    for (int h = 0; h < h_count; ++h) {
      const double* col = b + static_cast<std::size_t>(h) * dim;
      double s = 0.0;
      for (int d = 0; d < dim; ++d) s += col[d] * x[d];
      proj[h] = s;
      proj_sq += s * s;
    }
    const double proj_norm = std::sqrt(proj_sq);
    if (proj_norm < kResidualFloor) continue;  // nothing to reinforce
    for (int d = 0; d < dim; ++d) residual[d] = x[d];
    for (int h = 0; h < h_count; ++h) {
      const double* col = b + static_cast<std::size_t>(h) * dim;
      const double s = proj[h];
      for (int d = 0; d < dim; ++d) residual[d] -= s * col[d];
    }
    double res_sq = 0.0;
    for (double v : residual) res_sq += v * v;
    if (std::sqrt(res_sq) < kResidualFloor) continue;  // x is in the subspace

    // Rotate toward the sample by the projection error, scaled by the
    // projection norm: the step shrinks as the subspace closes in, so the
    // basis settles instead of orbiting the target at a fixed radius.
    const double step = learning_rate * hr / (proj_norm * x_norm);
    for (int h = 0; h < h_count; ++h) {
      double* col = b + static_cast<std::size_t>(h) * dim;
      const double s = step * proj[h];
      for (int d = 0; d < dim; ++d) col[d] += s * residual[d];
    }
    orthonormalize(bank.basis(r), dim, h_count);
  }
}

}  // namespace evgassom
