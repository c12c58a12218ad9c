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

#include "evgassom/gassom.hpp"
#include "evgassom/image.hpp"
#include "evgassom/pipeline.hpp"

namespace evgassom {

// One panel per subspace on the lattice grid. A panel has the basis
// vectors side by side as columns and the on/off planes stacked, with the
// gray level affine per panel: zero weight is mid-gray. Needs a two-type
// (on/off) layer.
GrayImage8 export_layer1_grid(const SubspaceBank& bank,
                              const LayerConfig& config);

// Layer-2 basis vectors drawn through the layer-1 subspaces they weight:
// at each spatial position of the (first) layer-2 basis vector, the
// layer-1 subspace with the largest absolute weight over all input types
// is rendered (its first basis vector, on over off), contrast-scaled by
// that weight and max-normalized per composite.
GrayImage8 export_layer2_composite(const SubspaceBank& bank2,
                                   const SubspaceBank& bank1,
                                   const LayerConfig& config2,
                                   const LayerConfig& config1);

// Winning (position, type) pairs for one layer-2 basis vector; exposed for
// the composite and its tests.
struct CompositeCell {
  int type = 0;       // layer-1 subspace index
  double weight = 0;  // |a| at the winning type
};
std::vector<CompositeCell> composite_selection(const SubspaceBank& bank2,
                                               int node, int h,
                                               const LayerConfig& config2);

}  // namespace evgassom
