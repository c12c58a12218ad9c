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

#include "evgassom/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evgassom {

namespace {
// Below this the lazy scale is folded into the cells so 1/scale stays
// representable.
constexpr double kRescaleFloor = 1e-250;
constexpr double kDegenerateNorm = 1e-12;
}  // namespace

RegionGrid tile_regions(SensorGeometry geometry, int patch_width, int stride) {
  if (geometry.width < 1 || geometry.height < 1 || geometry.num_types < 1) {
    fail(errc::invalid_argument, "sensor geometry fields must all be >= 1");
  }
  if (stride < 1) fail(errc::invalid_argument, "stride must be >= 1");
  if (patch_width < 1 || patch_width > geometry.width ||
      patch_width > geometry.height) {
    fail(errc::patch_larger_than_sensor,
         "patch " + std::to_string(patch_width) + " does not fit in " +
             std::to_string(geometry.width) + "x" +
             std::to_string(geometry.height));
  }
  int nx = (geometry.width - patch_width) / stride + 1;
  int ny = (geometry.height - patch_width) / stride + 1;
  return RegionGrid(geometry, patch_width, stride, nx, ny);
}

std::vector<std::pair<int, int>> RegionGrid::origins() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (int k = 0; k < count(); ++k) out.push_back(origin(k));
  return out;
}

LeakySurface::LeakySurface(int patch_width, int num_types, double tau_f_us)
    : width_(patch_width),
      tau_f_us_(tau_f_us),
      cells_(static_cast<std::size_t>(patch_width) * patch_width * num_types,
             0.0) {
  if (patch_width < 1 || num_types < 1 || tau_f_us <= 0.0) {
    fail(errc::invalid_argument, "surface needs positive shape and tau_f");
  }
}

void LeakySurface::flush(double pending_scale) noexcept {
  if (pending_scale == 0.0) {
    std::fill(cells_.begin(), cells_.end(), 0.0);
    raw_sum_ = 0.0;
  } else {
    for (double& c : cells_) c *= pending_scale;
    raw_sum_ = std::accumulate(cells_.begin(), cells_.end(), 0.0);
  }
  scale_ = 1.0;
}

void LeakySurface::add(int x, int y, int type, std::uint64_t t) {
  if (t < t_last_) {
    fail(errc::timestamp_regression,
         "event at t=" + std::to_string(t) + " before surface time " +
             std::to_string(t_last_));
  }
  if (t > t_last_) {
    if (raw_sum_ != 0.0) {
      const double decay =
          std::exp(-static_cast<double>(t - t_last_) / tau_f_us_);
      const double next = scale_ * decay;
      if (next < kRescaleFloor) {
        flush(next);
      } else {
        scale_ = next;
      }
    }
    t_last_ = t;
  }
  const double unit = 1.0 / scale_;
  cells_[static_cast<std::size_t>(type) * width_ * width_ +
         static_cast<std::size_t>(y) * width_ + x] += unit;
  raw_sum_ += unit;
}

std::vector<double> LeakySurface::values() const {
  std::vector<double> out(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = cells_[i] * scale_;
  return out;
}

void LeakySurface::reset() noexcept {
  std::fill(cells_.begin(), cells_.end(), 0.0);
  raw_sum_ = 0.0;
  scale_ = 1.0;
}

std::optional<SampleVector> LeakySurface::maybe_fire(double fire_threshold,
                                                     int region_index) {
  if (!(activity() > fire_threshold)) return std::nullopt;

  const std::size_t n = cells_.size();
  std::vector<double> v(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = cells_[i] * scale_;
    mean += v[i];
  }
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (double& e : v) {
    e -= mean;
    sq += e * e;
  }
  const double norm = std::sqrt(sq);
  reset();
  if (norm < kDegenerateNorm) {
    ++degenerate_;
    return std::nullopt;
  }
  for (double& e : v) e /= norm;
  return SampleVector{std::move(v), t_last_, region_index};
}

}  // namespace evgassom
