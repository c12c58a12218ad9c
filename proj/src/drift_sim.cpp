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

#include "evgassom/drift_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "evgassom/rng.hpp"

namespace evgassom {

std::vector<TrajectorySample> gen_drift_trajectory(const DriftParams& params,
                                                   double duration_s) {
  if (!(duration_s > 0.0)) {
    fail(errc::invalid_argument, "trajectory duration must be positive");
  }
  if (params.step_dt_s <= 0.0 || params.diffusion_arcmin2_per_s < 0.0 ||
      params.boundary <= 0.0 || params.pixels_per_degree <= 0.0) {
    fail(errc::invalid_argument, "drift parameters must be positive");
  }
  const double sigma =
      std::sqrt(params.diffusion_arcmin2_per_s * params.step_dt_s / 2.0);
  const double bound_sq = params.boundary_arcmin() * params.boundary_arcmin();
  const auto steps = static_cast<std::size_t>(
      std::ceil(duration_s / params.step_dt_s - 1e-9));

  Rng rng(params.seed);
  std::vector<TrajectorySample> out;
  out.reserve(steps + 1);
  double x = 0.0, y = 0.0;
  out.push_back({0.0, 0.0, 0.0});
  for (std::size_t k = 1; k <= steps; ++k) {
    x += sigma * rng.normal();
    y += sigma * rng.normal();
    if (x * x + y * y > bound_sq) {
      x = 0.0;
      y = 0.0;
    }
    out.push_back({static_cast<double>(k) * params.step_dt_s, x, y});
  }
  return out;
}

std::vector<Presentation> schedule(const StimulusProgram& program) {
  if (program.images.empty()) {
    fail(errc::empty_program, "stimulus program has no images");
  }
  if (program.presentation_interval_s <= 0.0 ||
      program.rotate_fraction < 0.0 || program.rotate_fraction > 1.0 ||
      program.rotation_range_deg < 0.0 || program.rotation_range_deg > 180.0) {
    fail(errc::invalid_argument, "bad stimulus program parameters");
  }
  Rng rng(program.seed);
  std::vector<Presentation> out;
  out.reserve(program.images.size());
  for (std::size_t i = 0; i < program.images.size(); ++i) {
    Presentation p;
    p.t_start_s = static_cast<double>(i) * program.presentation_interval_s;
    p.image_index = static_cast<int>(i);
    if (rng.uniform() < program.rotate_fraction) {
      p.rotation_deg = rng.uniform(0.0, program.rotation_range_deg);
    }
    out.push_back(p);
  }
  return out;
}

namespace {

// Bilinear lookup in the log image; anything outside falls back to the
// background level.
double sample_log(const GrayImage& img, double sx, double sy,
                  double background) {
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = sx - fx;
  const double ay = sy - fy;
  auto texel = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return background;
    return img.at(x, y);
  };
  const double top = (1.0 - ax) * texel(x0, y0) + ax * texel(x0 + 1, y0);
  const double bot =
      (1.0 - ax) * texel(x0, y0 + 1) + ax * texel(x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bot;
}

struct View {
  const GrayImage* image;
  double cos_r, sin_r;  // rotation about the image center
  double cx_img, cy_img;
  double cx_sensor, cy_sensor;
};

View make_view(const GrayImage& image, double rotation_deg,
               const SensorGeometry& sensor) {
  const double rad = rotation_deg * std::numbers::pi / 180.0;
  return View{&image,
              std::cos(rad),
              std::sin(rad),
              (image.width - 1) / 2.0,
              (image.height - 1) / 2.0,
              (sensor.width - 1) / 2.0,
              (sensor.height - 1) / 2.0};
}

void render_view(const View& v, double gaze_x_px, double gaze_y_px,
                 const SensorGeometry& sensor, double background,
                 std::vector<double>& out) {
  std::size_t i = 0;
  for (int y = 0; y < sensor.height; ++y) {
    const double ry = y - v.cy_sensor + gaze_y_px;
    for (int x = 0; x < sensor.width; ++x, ++i) {
      const double rx = x - v.cx_sensor + gaze_x_px;
      const double sx = v.cos_r * rx + v.sin_r * ry + v.cx_img;
      const double sy = -v.sin_r * rx + v.cos_r * ry + v.cy_img;
      out[i] = sample_log(*v.image, sx, sy, background);
    }
  }
}

struct PendingEvent {
  std::uint64_t t;
  std::uint16_t x, y, p;
};

// Threshold crossings for one pixel over one linear segment of its log
// intensity. Comparisons and interpolation mirror exactly under negation
// of all log values, which swaps on and off events.
void emit_crossings(double l_prev, double l_new, double& ref, double c,
                    double t0_us, double t1_us, int x, int y,
                    std::vector<PendingEvent>& out) {
  while (l_new - ref >= c) {
    ref += c;
    const double frac =
        l_new == l_prev ? 1.0 : (ref - l_prev) / (l_new - l_prev);
    out.push_back({static_cast<std::uint64_t>(
                       std::llround(t0_us + frac * (t1_us - t0_us))),
                   static_cast<std::uint16_t>(x),
                   static_cast<std::uint16_t>(y), 1});
  }
  while (ref - l_new >= c) {
    ref -= c;
    const double frac =
        l_new == l_prev ? 1.0 : (l_prev - ref) / (l_prev - l_new);
    out.push_back({static_cast<std::uint64_t>(
                       std::llround(t0_us + frac * (t1_us - t0_us))),
                   static_cast<std::uint16_t>(x),
                   static_cast<std::uint16_t>(y), 0});
  }
}

}  // namespace

EventStream render_events_from_log(
    const std::vector<GrayImage>& log_images,
    const std::vector<Presentation>& presentations, double duration_s,
    const std::vector<TrajectorySample>& trajectory, const DvsParams& dvs,
    double log_background, double pixels_per_arcmin) {
  if (log_images.empty() || presentations.empty()) {
    fail(errc::empty_program, "nothing to render");
  }
  if (dvs.contrast_threshold <= 0.0) {
    fail(errc::invalid_argument, "contrast threshold must be positive");
  }
  if (dvs.sensor.width < 1 || dvs.sensor.height < 1) {
    fail(errc::invalid_argument, "sensor geometry must be set");
  }
  if (trajectory.empty() || trajectory.back().t_s < duration_s - 1e-9) {
    fail(errc::invalid_argument, "trajectory does not cover the program");
  }

  const SensorGeometry sensor{dvs.sensor.width, dvs.sensor.height, 2};
  const std::size_t npix =
      static_cast<std::size_t>(sensor.width) * sensor.height;
  const double c = dvs.contrast_threshold;

  std::vector<double> l_prev(npix), l_new(npix), ref(npix);
  std::vector<PendingEvent> pending;
  std::vector<Event> events;

  Rng noise_rng(mix_seed(dvs.noise_seed, 0x6e6f6973));

  auto view_of = [&](const Presentation& p) {
    return make_view(log_images[static_cast<std::size_t>(p.image_index)],
                     p.rotation_deg, sensor);
  };
  auto gaze_px = [&](const TrajectorySample& s) {
    return std::pair{s.x_arcmin * pixels_per_arcmin,
                     s.y_arcmin * pixels_per_arcmin};
  };

  // Presentation switches snap to the trajectory sample grid.
  std::size_t active = 0;
  while (active + 1 < presentations.size() &&
         presentations[active + 1].t_start_s <= trajectory[0].t_s + 1e-12) {
    ++active;
  }
  View view = view_of(presentations[active]);
  {
    auto [gx, gy] = gaze_px(trajectory[0]);
    render_view(view, gx, gy, sensor, log_background, l_prev);
  }
  ref = l_prev;

  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const auto& ts = trajectory[k];
    if (ts.t_s > duration_s + 1e-9) break;
    const double t0_us = trajectory[k - 1].t_s * 1e6;
    const double t1_us = ts.t_s * 1e6;
    auto [gx, gy] = gaze_px(ts);
    pending.clear();

    // Drift under the current image.
    render_view(view, gx, gy, sensor, log_background, l_new);
    std::size_t i = 0;
    for (int y = 0; y < sensor.height; ++y) {
      for (int x = 0; x < sensor.width; ++x, ++i) {
        if (l_new[i] != l_prev[i]) {
          emit_crossings(l_prev[i], l_new[i], ref[i], c, t0_us, t1_us, x, y,
                         pending);
        }
      }
    }
    std::swap(l_prev, l_new);

    // Image switch at this sample: all crossings at exactly t1.
    std::size_t now = active;
    while (now + 1 < presentations.size() &&
           presentations[now + 1].t_start_s <= ts.t_s + 1e-12) {
      ++now;
    }
    if (now != active) {
      active = now;
      view = view_of(presentations[active]);
      render_view(view, gx, gy, sensor, log_background, l_new);
      i = 0;
      for (int y = 0; y < sensor.height; ++y) {
        for (int x = 0; x < sensor.width; ++x, ++i) {
          if (l_new[i] != l_prev[i]) {
            emit_crossings(l_prev[i], l_new[i], ref[i], c, t1_us, t1_us, x, y,
                           pending);
          }
        }
      }
      std::swap(l_prev, l_new);
    }

    if (dvs.background_rate_hz > 0.0) {
      const double lambda = dvs.background_rate_hz *
                            (ts.t_s - trajectory[k - 1].t_s) *
                            static_cast<double>(npix);
      // Knuth sampler; background rates are small by design.
      const double limit = std::exp(-lambda);
      double prod = noise_rng.uniform_pos();
      while (prod > limit) {
        const double t = t0_us + noise_rng.uniform() * (t1_us - t0_us);
        pending.push_back(
            {static_cast<std::uint64_t>(std::llround(t)),
             static_cast<std::uint16_t>(noise_rng.below(sensor.width)),
             static_cast<std::uint16_t>(noise_rng.below(sensor.height)),
             static_cast<std::uint16_t>(noise_rng.below(2))});
        prod *= noise_rng.uniform_pos();
      }
    }

    std::sort(pending.begin(), pending.end(),
              [](const PendingEvent& a, const PendingEvent& b) {
                return std::tie(a.t, a.y, a.x, a.p) <
                       std::tie(b.t, b.y, b.x, b.p);
              });
    for (const PendingEvent& pe : pending) {
      events.push_back(Event{pe.t, pe.x, pe.y, pe.p});
    }
  }

  return EventStream(sensor, std::move(events));
}

EventStream render_events(const StimulusProgram& program,
                          const std::vector<TrajectorySample>& trajectory,
                          const DvsParams& dvs, double pixels_per_degree) {
  if (program.images.empty()) {
    fail(errc::empty_program, "stimulus program has no images");
  }
  if (dvs.intensity_floor <= 0.0) {
    fail(errc::invalid_argument, "intensity floor must be positive");
  }
  std::vector<GrayImage> logs;
  logs.reserve(program.images.size());
  for (const GrayImage& img : program.images) {
    GrayImage lg = img;
    for (float& px : lg.pixels) {
      px = static_cast<float>(
          std::log(dvs.intensity_floor + static_cast<double>(px)));
    }
    logs.push_back(std::move(lg));
  }
  const double log_background = std::log(dvs.intensity_floor + 0.5);
  return render_events_from_log(logs, schedule(program), program.duration_s(),
                                trajectory, dvs, log_background,
                                pixels_per_degree / 60.0);
}

}  // namespace evgassom
