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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "evgassom/config.hpp"
#include "evgassom/pipeline.hpp"
#include "evgassom/rng.hpp"

using namespace evgassom;

namespace {

LayerConfig small_config() {
  LayerConfig c;
  c.patch_width = 4;
  c.stride = 2;
  c.fire_threshold = 6.0;
  c.tau_f_us = 10000.0;
  c.tau_s_us = 100000.0;
  c.num_subspaces = 4;
  c.subspace_dim = 2;
  c.input_types = 2;
  return c;
}

LayerConfig paper_layer1() {
  LayerConfig c;
  c.patch_width = 10;
  c.stride = 4;
  c.fire_threshold = 40.0;
  c.tau_f_us = 10000.0;
  c.tau_s_us = 100000.0;
  c.num_subspaces = 64;
  c.subspace_dim = 2;
  c.input_types = 2;
  return c;
}

LayerConfig paper_layer2() {
  LayerConfig c;
  c.patch_width = 8;
  c.stride = 2;
  c.fire_threshold = 10.0;
  c.tau_f_us = 50000.0;
  c.tau_s_us = 50000.0;
  c.num_subspaces = 256;
  c.subspace_dim = 2;
  c.input_types = 64;
  return c;
}

EventStream random_stream(SensorGeometry geo, std::size_t count,
                          std::uint64_t seed, std::uint64_t max_gap = 300) {
  Rng rng(seed);
  std::vector<Event> events;
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < count; ++i) {
    t += rng.below(max_gap);
    events.push_back(Event{t, static_cast<std::uint16_t>(rng.below(geo.width)),
                           static_cast<std::uint16_t>(rng.below(geo.height)),
                           static_cast<std::uint16_t>(rng.below(geo.num_types))});
  }
  return EventStream(geo, std::move(events));
}

}  // namespace

TEST_CASE("encode of an empty stream is empty and leaves the bank alone") {
  LayerConfig cfg = small_config();
  SensorGeometry geo{8, 8, 2};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 1);
  const auto before = bank.serialize();
  EventStream out = encode_layer(cfg, bank, EventStream(geo, {}));
  CHECK(out.empty());
  CHECK(out.geometry() == SensorGeometry{3, 3, 4});
  CHECK(bank.serialize() == before);
}

TEST_CASE("threshold-plus-one simultaneous events in one region fire once") {
  LayerConfig cfg = small_config();
  // stride == patch width so regions are disjoint; all events in region 0
  cfg.stride = 4;
  SensorGeometry geo{8, 8, 2};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 1);
  std::vector<Event> events;
  for (int i = 0; i < 7; ++i) {  // T_s = 6, so 7 events cross strictly
    events.push_back(Event{500, static_cast<std::uint16_t>(i % 4),
                           static_cast<std::uint16_t>(i / 4), 0});
  }
  EventStream out = encode_layer(cfg, bank, EventStream(geo, events));
  REQUIRE(out.size() == 1);
  CHECK(out.events()[0].t == 500);
  CHECK(out.events()[0].x == 0);
  CHECK(out.events()[0].y == 0);
}

TEST_CASE("output geometry follows the tiling arithmetic") {
  LayerConfig cfg = paper_layer1();
  SensorGeometry geo{128, 128, 2};
  SubspaceBank bank = init_bank(64, cfg.dim(), 2, 5);
  EventStream out = encode_layer(cfg, bank, random_stream(geo, 500, 3));
  CHECK(out.geometry().width == 30);
  CHECK(out.geometry().height == 30);
  CHECK(out.geometry().num_types == 64);
}

TEST_CASE("mismatches are rejected") {
  LayerConfig cfg = small_config();
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 1);
  SUBCASE("stream type count") {
    EventStream in(SensorGeometry{8, 8, 3}, {});
    CHECK_THROWS_AS(encode_layer(cfg, bank, in), Error);
  }
  SUBCASE("bank dimension") {
    SubspaceBank wrong = init_bank(cfg.num_subspaces, 10, 2, 1);
    EventStream in(SensorGeometry{8, 8, 2}, {});
    CHECK_THROWS_AS(encode_layer(cfg, wrong, in), Error);
  }
  SUBCASE("bank node count") {
    SubspaceBank wrong = init_bank(9, cfg.dim(), 2, 1);
    EventStream in(SensorGeometry{8, 8, 2}, {});
    CHECK_THROWS_AS(encode_layer(cfg, wrong, in), Error);
  }
}

TEST_CASE("encode mode is pure and monotone") {
  LayerConfig cfg = small_config();
  SensorGeometry geo{10, 10, 2};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 7);
  EventStream in = random_stream(geo, 4000, 11);
  const auto before = bank.serialize();
  EventStream a = encode_layer(cfg, bank, in);
  EventStream b = encode_layer(cfg, bank, in);
  CHECK(a == b);
  CHECK(bank.serialize() == before);
  CHECK(a.size() > 0);
  std::uint64_t prev = 0;
  for (const Event& e : a.events()) {
    CHECK(e.t >= prev);
    prev = e.t;
  }
}

TEST_CASE("events on region overlaps fire in region-index order") {
  LayerConfig cfg = small_config();  // w=4, stride=2: pixel (3,3) in 4 regions
  SensorGeometry geo{8, 8, 2};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 2);
  // every covering region accumulates identically, so all four fire at once
  std::vector<Event> events;
  for (int i = 0; i < 7; ++i) events.push_back(Event{100, 3, 3, 0});
  EventStream out = encode_layer(cfg, bank, EventStream(geo, events));
  REQUIRE(out.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(out.events()[i].t == 100);
    CHECK(out.events()[i].x == i % 2);
    CHECK(out.events()[i].y == i / 2);
  }
}

TEST_CASE("disjoint regions are independent of interleaving order") {
  LayerConfig cfg = small_config();
  cfg.stride = 4;  // disjoint tiling
  SensorGeometry geo{8, 8, 2};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 3);

  Rng rng(19);
  std::vector<Event> left, right;
  std::uint64_t t = 0;
  for (int i = 0; i < 600; ++i) {
    t += rng.below(400);
    left.push_back(Event{t, static_cast<std::uint16_t>(rng.below(4)),
                         static_cast<std::uint16_t>(rng.below(4)),
                         static_cast<std::uint16_t>(rng.below(2))});
    right.push_back(Event{t, static_cast<std::uint16_t>(4 + rng.below(4)),
                          static_cast<std::uint16_t>(4 + rng.below(4)),
                          static_cast<std::uint16_t>(rng.below(2))});
  }
  // Interleave both ways; timestamps are equal pairwise so both orders are
  // valid streams.
  std::vector<Event> ab, ba;
  for (int i = 0; i < 600; ++i) {
    ab.push_back(left[i]);
    ab.push_back(right[i]);
    ba.push_back(right[i]);
    ba.push_back(left[i]);
  }
  EventStream out_ab = encode_layer(cfg, bank, EventStream(geo, ab));
  EventStream out_ba = encode_layer(cfg, bank, EventStream(geo, ba));

  auto filter = [](const EventStream& s, std::uint16_t kx, std::uint16_t ky) {
    std::vector<Event> out;
    for (const Event& e : s.events()) {
      if (e.x == kx && e.y == ky) out.push_back(e);
    }
    return out;
  };
  for (std::uint16_t ky = 0; ky < 2; ++ky) {
    for (std::uint16_t kx = 0; kx < 2; ++kx) {
      CHECK(filter(out_ab, kx, ky) == filter(out_ba, kx, ky));
    }
  }
}

TEST_CASE("training updates the shared bank deterministically") {
  LayerConfig cfg = small_config();
  SensorGeometry geo{10, 10, 2};
  EventStream in = random_stream(geo, 6000, 23);
  TrainSchedule sched;

  auto run = [&] {
    SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 77);
    Trainer trainer(sched, in.size(), cfg.num_subspaces);
    run_layer(cfg, bank, in, RunMode::kTrain, &trainer);
    return bank.serialize();
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
  CHECK(a != init_bank(cfg.num_subspaces, cfg.dim(), 2, 77).serialize());
}

TEST_CASE("train_network with one layer equals run_layer in train mode") {
  LayerConfig cfg = small_config();
  SensorGeometry geo{10, 10, 2};
  EventStream in = random_stream(geo, 3000, 29);
  TrainSchedule sched;
  const std::uint64_t seed = 4242;

  auto banks = train_network({cfg}, in, 1, seed, sched);
  SubspaceBank manual =
      init_bank(cfg.num_subspaces, cfg.dim(), 2, mix_seed(seed, 0));
  Trainer trainer(sched, in.size(), cfg.num_subspaces);
  run_layer(cfg, manual, in, RunMode::kTrain, &trainer);
  CHECK(banks.size() == 1);
  CHECK(banks[0] == manual);
}

TEST_CASE("the paper two-layer cascade chains shapes") {
  std::vector<LayerConfig> configs = {paper_layer1(), paper_layer2()};
  validate_chain(configs);
  CHECK(configs[1].dim() == 4096);
  SUBCASE("mismatched chaining is rejected") {
    configs[1].input_types = 32;
    CHECK_THROWS_AS(validate_chain(configs), Error);
  }
}

TEST_CASE("two-layer training runs end to end deterministically") {
  LayerConfig l1 = small_config();
  LayerConfig l2;
  l2.patch_width = 2;
  l2.stride = 1;
  l2.fire_threshold = 3.0;
  l2.tau_f_us = 50000.0;
  l2.tau_s_us = 50000.0;
  l2.num_subspaces = 9;
  l2.subspace_dim = 2;
  l2.input_types = 4;

  SensorGeometry geo{10, 10, 2};
  EventStream in = random_stream(geo, 8000, 31);
  TrainSchedule sched;
  auto banks_a = train_network({l1, l2}, in, 1, 5, sched);
  auto banks_b = train_network({l1, l2}, in, 1, 5, sched);
  REQUIRE(banks_a.size() == 2);
  CHECK(banks_a[0] == banks_b[0]);
  CHECK(banks_a[1] == banks_b[1]);
  CHECK(banks_a[1].dim() == 2 * 2 * 4);

  auto outputs = encode_network({l1, l2}, banks_a, in);
  REQUIRE(outputs.size() == 2);
  CHECK(outputs[0].geometry().num_types == 4);
  CHECK(outputs[1].geometry().num_types == 9);

  // integrate-and-fire budget: every layer-2 fire consumes more than
  // T_s units of delivered activity, and each layer-1 event reaches at
  // most ceil(w/stride)^2 layer-2 regions.
  const double overlap = std::pow(
      std::ceil(static_cast<double>(l2.patch_width) / l2.stride), 2.0);
  CHECK(static_cast<double>(outputs[1].size()) <=
        overlap * static_cast<double>(outputs[0].size()) / l2.fire_threshold +
            banks_a[1].nodes());
}

TEST_CASE("gamma boundary resets only exist in training and change it") {
  LayerConfig cfg = small_config();
  SensorGeometry geo{10, 10, 2};
  EventStream in = random_stream(geo, 20000, 37, 100);
  TrainSchedule with_reset;
  with_reset.presentation_interval_us = 20000.0;
  with_reset.kappa = 2.0;  // weak emission so the prior is load-bearing
  TrainSchedule without_reset = with_reset;
  without_reset.reset_gamma_at_boundaries = false;

  auto train_with = [&](const TrainSchedule& sched) {
    SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 13);
    Trainer trainer(sched, in.size(), cfg.num_subspaces);
    run_layer(cfg, bank, in, RunMode::kTrain, &trainer);
    return bank.serialize();
  };
  CHECK(train_with(with_reset) != train_with(without_reset));
}

TEST_CASE("trainer schedule endpoints and neighborhood cache") {
  TrainSchedule sched;
  sched.lr0 = 0.2;
  sched.lr_final = 0.01;
  sched.sigma0 = 2.0;
  sched.sigma_final = 0.5;
  Trainer trainer(sched, 1000, 16);
  CHECK(trainer.learning_rate() == doctest::Approx(0.2));
  CHECK(trainer.sigma() == doctest::Approx(2.0));
  trainer.advance(500);
  CHECK(trainer.learning_rate() ==
        doctest::Approx(0.2 * std::pow(0.01 / 0.2, 0.5)));
  trainer.advance(500);
  CHECK(trainer.learning_rate() == doctest::Approx(0.01));
  CHECK(trainer.sigma() == doctest::Approx(0.5));
  trainer.advance(1000);  // saturates past the plan
  CHECK(trainer.learning_rate() == doctest::Approx(0.01));

  SubspaceBank bank = init_bank(16, 8, 2, 1);
  Trainer t2(sched, 100000, 16);
  const double s1 = t2.neighborhood(bank).sigma;
  t2.advance(100);  // far below 1% drift
  CHECK(t2.neighborhood(bank).sigma == s1);
  t2.advance(50000);
  CHECK(t2.neighborhood(bank).sigma != s1);
}

TEST_CASE("default sigma0 is sqrt(R)/4") {
  TrainSchedule sched;
  Trainer trainer(sched, 100, 64);
  CHECK(trainer.sigma() == doctest::Approx(2.0));
}

TEST_CASE("config files parse with duration suffixes and round-trip") {
  const std::string text = R"(# two-layer setup
[layer.1]
patch_width = 10
stride = 4
fire_threshold = 40
tau_f = 10 ms
tau_s = 100 ms
num_subspaces = 64
subspace_dim = 2
input_types = 2

[layer.2]
patch_width = 8
stride = 2
fire_threshold = 10
tau_f = 50000 us
tau_s = 50 ms
num_subspaces = 256
subspace_dim = 2
input_types = 64

[train]
kappa = 20
lr0 = 0.1
lr_final = 0.005
presentation_interval = 2 s
)";
  NetworkConfig cfg = parse_network_config(text);
  REQUIRE(cfg.layers.size() == 2);
  CHECK(cfg.layers[0].tau_f_us == doctest::Approx(10000.0));
  CHECK(cfg.layers[0].tau_s_us == doctest::Approx(100000.0));
  CHECK(cfg.layers[1].tau_f_us == doctest::Approx(50000.0));
  CHECK(cfg.layers[1].num_subspaces == 256);
  CHECK(cfg.train.presentation_interval_us == doctest::Approx(2e6));

  NetworkConfig back = parse_network_config(format_network_config(cfg));
  CHECK(back.layers.size() == cfg.layers.size());
  CHECK(back.layers[1].tau_s_us == cfg.layers[1].tau_s_us);
  CHECK(back.train.kappa == cfg.train.kappa);
}

TEST_CASE("config parse rejects malformed input") {
  CHECK_THROWS_AS(parse_network_config("patch_width = 3\n"), Error);
  CHECK_THROWS_AS(parse_network_config("[layer.2]\npatch_width = 3\n"), Error);
  CHECK_THROWS_AS(parse_network_config("[layer.1]\nwhat = 3\n"), Error);
  CHECK_THROWS_AS(parse_network_config("[layer.1]\npatch_width = x\n"), Error);
  CHECK_THROWS_AS(parse_network_config(""), Error);
}

TEST_CASE("network save/load round-trips and checks shapes") {
  LayerConfig cfg = small_config();
  NetworkConfig net;
  net.layers = {cfg};
  SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(), 2, 55);
  const std::string dir = "pipeline_net_test.tmp";
  save_network(dir, net, {bank});
  auto [loaded_cfg, loaded_banks] = load_network(dir);
  CHECK(loaded_banks.size() == 1);
  CHECK(loaded_banks[0] == bank);
  CHECK(loaded_cfg.layers[0].patch_width == cfg.patch_width);

  // a bank whose shape disagrees with the config is rejected
  SubspaceBank other = init_bank(cfg.num_subspaces, 10, 2, 55);
  write_file(dir + "/bank_layer1.gsb", other.serialize());
  CHECK_THROWS_AS(load_network(dir), Error);
}
