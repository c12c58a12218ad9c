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

#include "evgassom/viz.hpp"

#include <algorithm>
#include <cmath>

namespace evgassom {

namespace {

constexpr std::uint8_t kMidGray = 128;
constexpr int kSeparator = 1;

std::uint8_t shade(double value, double max_abs, double contrast = 1.0) {
  if (max_abs <= 0.0) return kMidGray;
  double v = 128.0 + 127.0 * contrast * (value / max_abs);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

}  // namespace

GrayImage8 export_layer1_grid(const SubspaceBank& bank,
                              const LayerConfig& config) {
  if (config.input_types != 2 || bank.dim() != config.dim() ||
      bank.nodes() != config.num_subspaces) {
    fail(errc::wrong_layer_shape,
         "layer-1 grid export needs a matching on/off bank");
  }
  const int w = config.patch_width;
  const int h_count = bank.subspace_dim();
  const int side = bank.lattice_side();
  const int panel_w = h_count * w;  // basis vectors as columns
  const int panel_h = 2 * w;        // on plane over off plane

  GrayImage8 img;
  img.width = side * panel_w + (side - 1) * kSeparator;
  img.height = side * panel_h + (side - 1) * kSeparator;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);

  for (int r = 0; r < bank.nodes(); ++r) {
    const int gx = (r % side) * (panel_w + kSeparator);
    const int gy = (r / side) * (panel_h + kSeparator);
    double max_abs = 0.0;
    for (double v : bank.basis(r)) max_abs = std::max(max_abs, std::abs(v));
    for (int h = 0; h < h_count; ++h) {
      auto vec = bank.basis_vector(r, h);
      for (int p = 0; p < 2; ++p) {
        for (int y = 0; y < w; ++y) {
          for (int x = 0; x < w; ++x) {
            const double v = vec[static_cast<std::size_t>(p) * w * w +
                                 static_cast<std::size_t>(y) * w + x];
            img.at(gx + h * w + x, gy + p * w + y) = shade(v, max_abs);
          }
        }
      }
    }
  }
  return img;
}

std::vector<CompositeCell> composite_selection(const SubspaceBank& bank2,
                                               int node, int h,
                                               const LayerConfig& config2) {
  const int w2 = config2.patch_width;
  const int types = config2.input_types;
  auto vec = bank2.basis_vector(node, h);
  std::vector<CompositeCell> cells(static_cast<std::size_t>(w2) * w2);
  for (int y = 0; y < w2; ++y) {
    for (int x = 0; x < w2; ++x) {
      CompositeCell best;
      best.weight = -1.0;
      for (int p = 0; p < types; ++p) {
        const double a = std::abs(vec[static_cast<std::size_t>(p) * w2 * w2 +
                                      static_cast<std::size_t>(y) * w2 + x]);
        if (a > best.weight) {
          best.weight = a;
          best.type = p;
        }
      }
      cells[static_cast<std::size_t>(y) * w2 + x] = best;
    }
  }
  return cells;
}

GrayImage8 export_layer2_composite(const SubspaceBank& bank2,
                                   const SubspaceBank& bank1,
                                   const LayerConfig& config2,
                                   const LayerConfig& config1) {
  if (config2.input_types != bank1.nodes() ||
      bank2.dim() != config2.dim() || bank1.dim() != config1.dim() ||
      config1.input_types != 2) {
    fail(errc::chain_mismatch,
         "layer-2 composite needs chained layer-1/layer-2 banks");
  }
  const int w1 = config1.patch_width;
  const int w2 = config2.patch_width;
  const int side2 = bank2.lattice_side();
  const int tile_w = w1;       // first layer-1 basis vector only
  const int tile_h = 2 * w1;   // on plane over off plane
  const int comp_w = w2 * tile_w;
  const int comp_h = w2 * tile_h;

  GrayImage8 img;
  img.width = side2 * comp_w + (side2 - 1) * kSeparator;
  img.height = side2 * comp_h + (side2 - 1) * kSeparator;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);

  for (int r2 = 0; r2 < bank2.nodes(); ++r2) {
    const int ox = (r2 % side2) * (comp_w + kSeparator);
    const int oy = (r2 / side2) * (comp_h + kSeparator);
    const auto cells = composite_selection(bank2, r2, 0, config2);
    double max_weight = 0.0;
    for (const CompositeCell& c : cells) {
      max_weight = std::max(max_weight, c.weight);
    }
    for (int cy = 0; cy < w2; ++cy) {
      for (int cx = 0; cx < w2; ++cx) {
        const CompositeCell& cell =
            cells[static_cast<std::size_t>(cy) * w2 + cx];
        const double contrast =
            max_weight > 0.0 ? cell.weight / max_weight : 0.0;
        auto vec = bank1.basis_vector(cell.type, 0);
        double l1_max = 0.0;
        for (double v : vec) l1_max = std::max(l1_max, std::abs(v));
        for (int p = 0; p < 2; ++p) {
          for (int y = 0; y < w1; ++y) {
            for (int x = 0; x < w1; ++x) {
              const double v = vec[static_cast<std::size_t>(p) * w1 * w1 +
                                   static_cast<std::size_t>(y) * w1 + x];
              img.at(ox + cx * tile_w + x, oy + cy * tile_h + p * w1 + y) =
                  shade(v, l1_max, contrast);
            }
          }
        }
      }
    }
  }
  return img;
}

}  // namespace evgassom
