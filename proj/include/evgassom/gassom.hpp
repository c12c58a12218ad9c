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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evgassom/errors.hpp"

namespace evgassom {

// R subspaces of H orthonormal basis vectors each, the nodes of a square
// 2-D lattice. Storage is one flat array in (node, basis, component) order,
// so each basis vector is contiguous and the layout matches the GSB1 wire
// format byte for byte.
class SubspaceBank {
 public:
  SubspaceBank() = default;
  SubspaceBank(int num_nodes, int dim, int subspace_dim);

  int nodes() const noexcept { return nodes_; }
  int dim() const noexcept { return dim_; }
  int subspace_dim() const noexcept { return subspace_dim_; }
  int lattice_side() const noexcept { return side_; }

  std::span<double> basis(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * subspace_dim_ * dim_,
            static_cast<std::size_t>(subspace_dim_) * dim_};
  }
  std::span<const double> basis(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * subspace_dim_ * dim_,
            static_cast<std::size_t>(subspace_dim_) * dim_};
  }
  std::span<double> basis_vector(int r, int h) {
    return basis(r).subspan(static_cast<std::size_t>(h) * dim_, dim_);
  }
  std::span<const double> basis_vector(int r, int h) const {
    return basis(r).subspan(static_cast<std::size_t>(h) * dim_, dim_);
  }

  // Lattice coordinate of node r: (column, row) on the side x side grid.
  std::pair<double, double> lattice_position(int r) const {
    return {static_cast<double>(r % side_), static_cast<double>(r / side_)};
  }

  // GSB1 container: magic 'G','S','B','1'; u32 LE R, D, H, lattice side;
  // R*H*D IEEE f64 LE in (r, h, d) order; trailing CRC32 (u32 LE) of all
  // preceding bytes.
  std::vector<std::uint8_t> serialize() const;
  static SubspaceBank deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const SubspaceBank&, const SubspaceBank&) = default;

 private:
  int nodes_ = 0;
  int dim_ = 0;
  int subspace_dim_ = 0;
  int side_ = 0;
  std::vector<double> data_;
};

// Concentration of the emission likelihood p(x | node r) ~ exp(kappa *
// squared projection). Larger kappa makes the posterior trust the current
// sample more relative to the temporal prior.
struct EmissionModel {
  double kappa = 20.0;
};

// Posterior over which node generated the most recent sample, carried
// between output events of one sub-region.
struct LatentPosterior {
  std::vector<double> gamma;
  std::uint64_t t_prev = 0;

  static LatentPosterior uniform(int num_nodes);
  void reset_uniform();
};

// Row-stochastic lattice smoothing. sigma is the Gaussian width in lattice
// units; each row n holds the normalized kernel centred on node n.
struct NeighborhoodMatrix {
  int nodes = 0;
  double sigma = 0.0;
  std::vector<double> weights;  // row-major, nodes x nodes

  double at(int n, int m) const {
    return weights[static_cast<std::size_t>(n) * nodes + m];
  }
};

// Random orthonormal bank, reproducible from the seed.
SubspaceBank init_bank(int num_nodes, int dim, int subspace_dim,
                       std::uint64_t seed);

// Gram-Schmidt in column order over the (subspace_dim x dim) basis stored
// basis-vector-major. Keeps the first vector's direction. Throws
// RankDeficient when a column is (numerically) dependent on its
// predecessors.
void orthonormalize(std::span<double> basis, int dim, int subspace_dim);

// Squared projection length of x onto every subspace.
void response(const SubspaceBank& bank, std::span<const double> x,
              std::span<double> out);
std::vector<double> response(const SubspaceBank& bank,
                             std::span<const double> x);

// Index of the subspace with the largest response; ties go to the lowest
// index.
int classify_event(const SubspaceBank& bank, std::span<const double> x);

// Probability of leaving the current node, from the time since the previous
// output event: 1 - exp(-dt / tau_s).
double transition_mix(std::uint64_t t, std::uint64_t t_prev, double tau_s_us);

// One forward-algorithm step in log space: mixes the previous posterior
// with a uniform distribution by rho, weights by the emission likelihood,
// renormalizes. `resp` must already hold response(bank, x). t_prev is left
// to the caller.
void forward_step_inplace(std::span<const double> resp, double rho,
                          const EmissionModel& emission,
                          std::vector<double>& gamma);
LatentPosterior forward_step(const SubspaceBank& bank,
                             const LatentPosterior& previous,
                             std::span<const double> x, double rho,
                             const EmissionModel& emission);

NeighborhoodMatrix neighborhood_matrix(const SubspaceBank& bank, double sigma);

// Competitive update: the winner of gamma and its lattice neighbors rotate
// toward the sample, then every touched basis is re-orthonormalized.
void update_step(SubspaceBank& bank, std::span<const double> x,
                 std::span<const double> gamma, const NeighborhoodMatrix& g,
                 double learning_rate);

}  // namespace evgassom
