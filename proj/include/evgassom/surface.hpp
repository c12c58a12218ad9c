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
#include <optional>
#include <utility>
#include <vector>

#include "evgassom/events.hpp"

namespace evgassom {

// Regular tiling of the sensor into patch_width x patch_width sub-regions
// spaced `stride` pixels apart; only fully contained positions count. A
// pixel can be covered by several regions.
class RegionGrid {
 public:
  RegionGrid() = default;
  RegionGrid(SensorGeometry geometry, int patch_width, int stride, int nx,
             int ny)
      : geometry_(geometry),
        patch_width_(patch_width),
        stride_(stride),
        nx_(nx),
        ny_(ny) {}

  const SensorGeometry& geometry() const noexcept { return geometry_; }
  int patch_width() const noexcept { return patch_width_; }
  int stride() const noexcept { return stride_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int count() const noexcept { return nx_ * ny_; }

  // Origin (x0, y0) of region k; k = ky * nx + kx.
  std::pair<int, int> origin(int k) const {
    return {(k % nx_) * stride_, (k / nx_) * stride_};
  }
  std::vector<std::pair<int, int>> origins() const;

  // Inclusive grid-index range [lo, hi] of regions covering a coordinate
  // along one axis; hi < lo means no region covers it.
  struct IndexSpan {
    int lo = 0;
    int hi = -1;
  };
  IndexSpan cover_x(int x) const { return cover(x, nx_); }
  IndexSpan cover_y(int y) const { return cover(y, ny_); }

 private:
  IndexSpan cover(int c, int n) const {
    IndexSpan s;
    s.lo = (c - patch_width_ + 1 + stride_ - 1);
    s.lo = s.lo <= 0 ? 0 : s.lo / stride_;
    s.hi = c / stride_;
    if (s.hi >= n) s.hi = n - 1;
    return s;
  }

  SensorGeometry geometry_;
  int patch_width_ = 0;
  int stride_ = 0;
  int nx_ = 0;
  int ny_ = 0;
};

RegionGrid tile_regions(SensorGeometry geometry, int patch_width, int stride);

// Sample emitted when a sub-region fires: the flattened surface,
// mean-subtracted and scaled to unit norm. Layout is type-major, then
// row-major: index = p * w * w + y * w + x.
struct SampleVector {
  std::vector<double> x;
  std::uint64_t t = 0;  // firing timestamp, microseconds
  int region_index = 0;
};

// Per-sub-region spatiotemporal surface. Every cell decays by the same
// exponential factor between events, so the decay is tracked as one scalar
// per region and applied lazily: each event costs O(1), not O(w^2 P).
class LeakySurface {
 public:
  LeakySurface() = default;
  LeakySurface(int patch_width, int num_types, double tau_f_us);

  // Decays the whole surface by exp(-(t - t_last)/tau_f), then adds one
  // unit at (x, y, type). Throws TimestampRegression if t goes backwards.
  void add(int x, int y, int type, std::uint64_t t);

  // Sum of the surface over all cells.
  double activity() const noexcept { return raw_sum_ * scale_; }

  std::uint64_t last_time() const noexcept { return t_last_; }
  int dim() const noexcept { return static_cast<int>(cells_.size()); }

  // True surface values (decay applied), flattened in sample order.
  std::vector<double> values() const;

  // Fires when activity() exceeds the threshold strictly: flattens the
  // surface into a zero-mean unit vector, resets every cell, and returns
  // the sample stamped with the last event's timestamp. An all-equal
  // surface has no direction after mean subtraction; it still resets but
  // yields nothing and bumps degenerate_drops().
  std::optional<SampleVector> maybe_fire(double fire_threshold,
                                         int region_index);

  void reset() noexcept;
  std::uint64_t degenerate_drops() const noexcept { return degenerate_; }

 private:
  void flush(double pending_scale) noexcept;

  int width_ = 0;
  double tau_f_us_ = 1.0;
  std::vector<double> cells_;  // true value = cells_[i] * scale_
  double scale_ = 1.0;
  double raw_sum_ = 0.0;
  std::uint64_t t_last_ = 0;
  std::uint64_t degenerate_ = 0;
};

inline double total_activity(const LeakySurface& s) noexcept {
  return s.activity();
}

}  // namespace evgassom
