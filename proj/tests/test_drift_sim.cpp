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

#include <cmath>
#include <map>
#include <tuple>

#include "doctest.h"
#include "evgassom/drift_sim.hpp"
#include "evgassom/rng.hpp"
#include "oracles.hpp"
#include "stimuli.hpp"

using namespace evgassom;

TEST_CASE("zero diffusion pins the trajectory at the origin") {
  DriftParams p;
  p.diffusion_arcmin2_per_s = 0.0;
  auto traj = gen_drift_trajectory(p, 1.0);
  CHECK(traj.size() == 41);  // 1 s at 25 ms steps, plus the origin sample
  for (const auto& s : traj) {
    CHECK(s.x_arcmin == 0.0);
    CHECK(s.y_arcmin == 0.0);
  }
}

TEST_CASE("trajectories are deterministic per seed") {
  DriftParams p;
  p.seed = 21;
  auto a = gen_drift_trajectory(p, 2.0);
  auto b = gen_drift_trajectory(p, 2.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x_arcmin == b[i].x_arcmin);
    CHECK(a[i].y_arcmin == b[i].y_arcmin);
  }
  p.seed = 22;
  auto c = gen_drift_trajectory(p, 2.0);
  bool any_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_differ = any_differ || a[i].x_arcmin != c[i].x_arcmin;
  }
  CHECK(any_differ);
}

TEST_CASE("mean squared displacement matches the diffusion constant") {
  // Monte-Carlo over many seeds at t = 0.25 s; the boundary is far away.
  DriftParams p;
  const double t_check = 0.25;
  double sum_sq = 0.0;
  const int trials = 20000;
  for (int seed = 0; seed < trials; ++seed) {
    p.seed = static_cast<std::uint64_t>(seed);
    auto traj = gen_drift_trajectory(p, t_check);
    const auto& last = traj.back();
    sum_sq += last.x_arcmin * last.x_arcmin + last.y_arcmin * last.y_arcmin;
  }
  const double msd = sum_sq / trials;
  const double want = p.diffusion_arcmin2_per_s * t_check;  // 10 arcmin^2
  CHECK(msd > want * 0.95);
  CHECK(msd < want * 1.05);
}

TEST_CASE("steps landing beyond the boundary reset to the center") {
  DriftParams p;
  p.diffusion_arcmin2_per_s = 400.0;
  p.boundary = 2.0;
  p.boundary_unit = DriftParams::BoundaryUnit::kArcmin;
  p.seed = 5;
  auto traj = gen_drift_trajectory(p, 50.0);
  int resets = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double r = std::hypot(traj[i].x_arcmin, traj[i].y_arcmin);
    CHECK(r <= 2.0 + 1e-12);
    const bool moved =
        std::abs(traj[i].x_arcmin - traj[i - 1].x_arcmin) > 1e-12;
    if (traj[i].x_arcmin == 0.0 && traj[i].y_arcmin == 0.0 && moved) ++resets;
  }
  CHECK(resets > 0);
}

TEST_CASE("schedule spaces presentations and rotates a seeded fraction") {
  StimulusProgram prog;
  for (int i = 0; i < 5; ++i) prog.images.push_back(make_image(2, 2));
  prog.presentation_interval_s = 2.0;
  SUBCASE("start times") {
    auto sched = schedule(prog);
    REQUIRE(sched.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(sched[i].t_start_s == doctest::Approx(2.0 * i));
      CHECK(sched[i].image_index == i);
    }
  }
  SUBCASE("rotate_fraction 0 means no rotation") {
    prog.rotate_fraction = 0.0;
    for (const auto& pres : schedule(prog)) CHECK(pres.rotation_deg == 0.0);
  }
  SUBCASE("rotate_fraction 1 gives angles uniform on [0, 180]") {
    StimulusProgram big;
    for (int i = 0; i < 1000; ++i) big.images.push_back(make_image(1, 1));
    big.rotate_fraction = 1.0;
    big.seed = 9;
    std::vector<double> angles;
    for (const auto& pres : schedule(big)) angles.push_back(pres.rotation_deg);
    const double d = oracles::ks_statistic(angles, 0.0, 180.0);
    // 1.63 / sqrt(n) rejects uniformity at p = 0.01
    CHECK(d < 1.63 / std::sqrt(1000.0));
  }
  SUBCASE("empty program is an error") {
    StimulusProgram empty;
    CHECK_THROWS_AS(schedule(empty), Error);
  }
}

TEST_CASE("a uniform image emits no events") {
  StimulusProgram prog;
  prog.images.push_back(make_image(64, 64, 0.7f));
  prog.presentation_interval_s = 1.0;
  DvsParams dvs;
  dvs.sensor = {32, 32, 2};
  DriftParams drift;
  drift.seed = 3;
  auto traj = gen_drift_trajectory(drift, prog.duration_s());
  EventStream s = render_events(prog, traj, dvs, 40.0);
  CHECK(s.empty());
}

TEST_CASE("a translated step edge fires a single polarity along the edge") {
  // Log image: left half low, right half high; move one pixel right in a
  // single step.
  GrayImage lg = make_image(96, 48, -1.0f);
  for (int y = 0; y < 48; ++y) {
    for (int x = 48; x < 96; ++x) lg.at(x, y) = 1.0f;
  }
  std::vector<Presentation> pres = {{0.0, 0, 0.0}};
  std::vector<TrajectorySample> traj = {{0.0, 0.0, 0.0}, {0.025, 1.0, 0.0}};
  DvsParams dvs;
  dvs.sensor = {32, 32, 2};
  dvs.contrast_threshold = 0.3;
  EventStream s =
      render_events_from_log({lg}, pres, 0.025, traj, dvs, -1.0, 1.0);
  REQUIRE(s.size() > 0);
  std::map<int, int> on_cols, off_cols;
  for (const Event& e : s.events()) {
    CHECK(e.t <= 25000);
    (e.p == 1 ? on_cols : off_cols)[e.x]++;
  }
  // Gaze +1 px pans the view right, so pixels at the edge see brighter
  // content: on events in one column band, no off events anywhere.
  CHECK(!on_cols.empty());
  CHECK(off_cols.empty());
  CHECK(on_cols.size() <= 2);
}

TEST_CASE("a drifting sine grating matches the crossing-count oracle") {
  const int img_w = 256, img_h = 48;
  const double amp = 1.2;
  const double k = 2.0 * std::numbers::pi / 16.0;  // 16 px wavelength
  GrayImage lg = make_image(img_w, img_h);
  for (int y = 0; y < img_h; ++y) {
    for (int x = 0; x < img_w; ++x) {
      lg.at(x, y) = static_cast<float>(amp * std::sin(k * x));
    }
  }
  const double speed_px = 64.0;  // per second, 4 wavelengths over the run
  const double duration = 1.0;
  std::vector<TrajectorySample> traj;
  for (int i = 0; i <= 40; ++i) {
    traj.push_back({i * 0.025, i * 0.025 * speed_px, 0.0});
  }
  DvsParams dvs;
  dvs.sensor = {32, 32, 2};
  dvs.contrast_threshold = 0.15;
  std::vector<Presentation> pres = {{0.0, 0, 0.0}};
  EventStream s =
      render_events_from_log({lg}, pres, duration, traj, dvs, 0.0, 1.0);

  // Analytic rate: each pixel's log intensity has total variation
  // amp * k * (2/pi) * distance when the displacement is a whole number of
  // wavelengths, and each crossing of the threshold emits one event.
  const double tv_per_px =
      amp * k * (2.0 / std::numbers::pi) * speed_px * duration;
  const double expected = tv_per_px / dvs.contrast_threshold * 32.0 * 32.0;
  CHECK(static_cast<double>(s.size()) > 0.9 * expected);
  CHECK(static_cast<double>(s.size()) < 1.1 * expected);
  std::size_t on = 0;
  for (const Event& e : s.events()) on += e.p;
  CHECK(std::abs(static_cast<double>(on) -
                 static_cast<double>(s.size()) / 2.0) <
        0.05 * static_cast<double>(s.size()));
}

TEST_CASE("negating the log image swaps on and off events exactly") {
  GrayImage u = stimuli::dead_leaves(128, 31);
  for (float& px : u.pixels) px = std::log(0.01f + px);
  GrayImage neg = u;
  for (float& px : neg.pixels) px = -px;

  DriftParams drift;
  drift.seed = 77;
  DvsParams dvs;
  dvs.sensor = {48, 48, 2};
  std::vector<Presentation> pres = {{0.0, 0, 0.0}};
  auto traj = gen_drift_trajectory(drift, 1.0);
  EventStream a =
      render_events_from_log({u}, pres, 1.0, traj, dvs, 0.0, 40.0 / 60.0);
  EventStream b =
      render_events_from_log({neg}, pres, 1.0, traj, dvs, 0.0, 40.0 / 60.0);
  REQUIRE(a.size() > 100);
  REQUIRE(a.size() == b.size());
  auto key = [](const Event& e) { return std::tuple{e.t, e.y, e.x, e.p}; };
  std::vector<Event> mirrored;
  for (Event e : a.events()) {
    e.p = static_cast<std::uint16_t>(1 - e.p);
    mirrored.push_back(e);
  }
  std::vector<Event> other = b.events();
  std::sort(mirrored.begin(), mirrored.end(),
            [&](const Event& l, const Event& r) { return key(l) < key(r); });
  std::sort(other.begin(), other.end(),
            [&](const Event& l, const Event& r) { return key(l) < key(r); });
  CHECK(mirrored == other);
}

TEST_CASE("image switches discharge at the presentation boundary instant") {
  GrayImage bright = make_image(32, 32, 0.9f);
  GrayImage dark = make_image(32, 32, 0.2f);
  StimulusProgram prog;
  prog.images = {bright, dark};
  prog.presentation_interval_s = 0.1;
  prog.rotate_fraction = 0.0;
  DriftParams drift;
  drift.diffusion_arcmin2_per_s = 0.0;  // no drift: only the switch emits
  DvsParams dvs;
  dvs.sensor = {16, 16, 2};
  auto traj = gen_drift_trajectory(drift, prog.duration_s());
  EventStream s = render_events(prog, traj, dvs, 40.0);
  REQUIRE(s.size() > 0);
  for (const Event& e : s.events()) {
    CHECK(e.t == 100000);  // all crossings at the boundary sample
    CHECK(e.p == 0);       // brightness drops
  }
}

TEST_CASE("rendered streams are deterministic") {
  StimulusProgram prog;
  prog.images.push_back(stimuli::grating(96, 0.6, 0.08, 0.3));
  prog.images.push_back(stimuli::dead_leaves(96, 4));
  prog.presentation_interval_s = 0.2;
  prog.seed = 12;
  DriftParams drift;
  drift.seed = 13;
  DvsParams dvs;
  dvs.sensor = {48, 48, 2};
  auto traj = gen_drift_trajectory(drift, prog.duration_s());
  EventStream a = render_events(prog, traj, dvs, 40.0);
  EventStream b = render_events(prog, traj, dvs, 40.0);
  CHECK(a.size() > 0);
  CHECK(a == b);
  CHECK(encode_native(a) == encode_native(b));
}

TEST_CASE("trajectory must cover the program duration") {
  StimulusProgram prog;
  prog.images.push_back(make_image(8, 8));
  prog.presentation_interval_s = 2.0;
  DriftParams drift;
  auto traj = gen_drift_trajectory(drift, 0.5);
  DvsParams dvs;
  dvs.sensor = {8, 8, 2};
  CHECK_THROWS_AS(render_events(prog, traj, dvs, 40.0), Error);
}
