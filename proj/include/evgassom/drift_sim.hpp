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
#include <vector>

#include "evgassom/events.hpp"
#include "evgassom/image.hpp"

namespace evgassom {

// Fixational drift: a discrete random walk of the gaze direction that
// resets to center at a radial boundary.
struct DriftParams {
  double diffusion_arcmin2_per_s = 40.0;
  double step_dt_s = 0.025;
  double boundary = 30.0;
  enum class BoundaryUnit { kDegrees, kArcmin };
  BoundaryUnit boundary_unit = BoundaryUnit::kDegrees;
  double pixels_per_degree = 40.0;
  std::uint64_t seed = 0;

  double boundary_arcmin() const {
    return boundary_unit == BoundaryUnit::kDegrees ? boundary * 60.0
                                                   : boundary;
  }
};

struct TrajectorySample {
  double t_s = 0.0;
  double x_arcmin = 0.0;
  double y_arcmin = 0.0;
};

// Gaze positions at multiples of step_dt, starting at the origin, covering
// at least `duration_s`. Per-axis steps are independent Gaussians with
// variance diffusion * step_dt / 2, so the mean squared radial displacement
// grows as diffusion * t. A step landing outside the boundary is recorded
// as (0, 0) instead.
std::vector<TrajectorySample> gen_drift_trajectory(const DriftParams& params,
                                                   double duration_s);

// Static images shown in sequence; a seeded fraction is rotated by a
// uniform random angle.
struct StimulusProgram {
  std::vector<GrayImage> images;
  double presentation_interval_s = 2.0;
  double rotate_fraction = 0.3;
  double rotation_range_deg = 180.0;
  std::uint64_t seed = 0;

  double duration_s() const {
    return static_cast<double>(images.size()) * presentation_interval_s;
  }
};

struct Presentation {
  double t_start_s = 0.0;
  int image_index = 0;
  double rotation_deg = 0.0;
};

std::vector<Presentation> schedule(const StimulusProgram& program);

// Log-intensity threshold-crossing sensor emulation.
struct DvsParams {
  double contrast_threshold = 0.15;
  SensorGeometry sensor;
  double intensity_floor = 0.01;  // added before the log
  double background_rate_hz = 0.0;
  std::uint64_t noise_seed = 0;
};

// Renders the program through the drifting gaze into an event stream. Per
// pixel a reference log intensity is kept; every crossing of
// reference +- contrast_threshold emits an on/off event, timestamped by
// linear interpolation inside the trajectory step. Image switches take
// effect at the first trajectory sample at or after their start time and
// discharge all crossings at exactly that instant. pixels_per_degree
// converts trajectory arcmin into image pixels.
EventStream render_events(const StimulusProgram& program,
                          const std::vector<TrajectorySample>& trajectory,
                          const DvsParams& dvs,
                          double pixels_per_degree = 40.0);

// Emulation core working directly on log-intensity images (pixels already
// hold log values; no floor/log applied). render_events converts and
// forwards here.
EventStream render_events_from_log(
    const std::vector<GrayImage>& log_images,
    const std::vector<Presentation>& presentations, double duration_s,
    const std::vector<TrajectorySample>& trajectory, const DvsParams& dvs,
    double log_background, double pixels_per_arcmin = 1.0);

}  // namespace evgassom
