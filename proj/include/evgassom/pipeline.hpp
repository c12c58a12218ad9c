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
#include <functional>
#include <optional>
#include <vector>

#include "evgassom/events.hpp"
#include "evgassom/gassom.hpp"
#include "evgassom/surface.hpp"

namespace evgassom {

// Everything one layer needs: surface shape and time constants plus the
// bank shape it drives.
struct LayerConfig {
  int patch_width = 0;        // w
  int stride = 0;             // eta
  double fire_threshold = 0;  // T_s
  double tau_f_us = 0;
  double tau_s_us = 0;
  int num_subspaces = 0;  // R
  int subspace_dim = 2;   // H
  int input_types = 0;    // P

  int dim() const noexcept { return patch_width * patch_width * input_types; }
  void validate() const;
};

enum class RunMode { kTrain, kEncode };

// Training hyperparameters. The learning rate and neighborhood width decay
// exponentially over the planned number of input events; sigma0 == 0 means
// "sqrt(R)/4 for this layer's R".
struct TrainSchedule {
  double lr0 = 0.1;
  double lr_final = 0.005;
  double sigma0 = 0.0;
  double sigma_final = 0.5;
  double kappa = 20.0;
  bool reset_gamma_at_boundaries = true;
  double presentation_interval_us = 0.0;  // 0 = no boundaries
};

// Tracks schedule position across epochs of one layer's training run. The
// neighborhood matrix is cached and only rebuilt when sigma has drifted by
// more than 1%.
class Trainer {
 public:
  Trainer(TrainSchedule schedule, std::uint64_t planned_events,
          int num_subspaces);

  double learning_rate() const;
  double sigma() const;
  const NeighborhoodMatrix& neighborhood(const SubspaceBank& bank);
  EmissionModel emission() const { return {schedule_.kappa}; }
  const TrainSchedule& schedule() const { return schedule_; }
  void advance(std::uint64_t input_events) { consumed_ += input_events; }
  std::uint64_t consumed() const { return consumed_; }

 private:
  TrainSchedule schedule_;
  std::uint64_t planned_ = 1;
  std::uint64_t consumed_ = 0;
  NeighborhoodMatrix cached_;
};

struct LayerRunStats {
  std::uint64_t input_events = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t output_events = 0;
  std::uint64_t degenerate_drops = 0;
};

// Called on every fire with the sample and the winning subspace index.
using SampleSink = std::function<void(const SampleVector&, int winner)>;

// Streams events through one layer: every event is delivered to every
// covering sub-region in region-index order; a firing region runs the
// forward step and emits an output event at the region's grid coordinate
// with the index of the best-matching subspace as its type. In kTrain mode
// the shared bank is updated after each fire; in kEncode mode it is left
// untouched. Output geometry is (grid nx, grid ny, R).
EventStream run_layer(const LayerConfig& config, SubspaceBank& bank,
                      const EventStream& input, RunMode mode,
                      Trainer* trainer = nullptr,
                      LayerRunStats* stats = nullptr,
                      const SampleSink* sink = nullptr);

// Encode without write access to the bank.
EventStream encode_layer(const LayerConfig& config, const SubspaceBank& bank,
                         const EventStream& input,
                         LayerRunStats* stats = nullptr,
                         const SampleSink* sink = nullptr,
                         const EmissionModel& emission = {});

// Checks that consecutive configs chain (layer n+1 consumes layer n's R
// event types).
void validate_chain(const std::vector<LayerConfig>& configs);

// Sequential cascade training: each layer is trained for `epochs` passes,
// frozen, and the stream replayed through it to feed the next layer.
// Deterministic given the seed.
std::vector<SubspaceBank> train_network(const std::vector<LayerConfig>& configs,
                                        const EventStream& input, int epochs,
                                        std::uint64_t seed,
                                        const TrainSchedule& schedule,
                                        std::vector<LayerRunStats>* stats = nullptr);

// Pure cascade encode; returns every layer's output stream.
std::vector<EventStream> encode_network(const std::vector<LayerConfig>& configs,
                                        const std::vector<SubspaceBank>& banks,
                                        const EventStream& input);

}  // namespace evgassom
