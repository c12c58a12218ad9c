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

#include "evgassom/pipeline.hpp"

#include <cmath>
#include <string>

#include "evgassom/rng.hpp"

namespace evgassom {

void LayerConfig::validate() const {
  if (patch_width < 1 || stride < 1 || num_subspaces < 1 ||
      subspace_dim < 1 || input_types < 1 || fire_threshold <= 0.0 ||
      tau_f_us <= 0.0 || tau_s_us <= 0.0) {
    fail(errc::bad_config, "layer config fields must all be positive");
  }
  int side = static_cast<int>(std::lround(std::sqrt(num_subspaces)));
  if (side * side != num_subspaces) {
    fail(errc::not_perfect_square,
         "num_subspaces " + std::to_string(num_subspaces) +
             " is not a perfect square");
  }
}

Trainer::Trainer(TrainSchedule schedule, std::uint64_t planned_events,
                 int num_subspaces)
    : schedule_(schedule), planned_(planned_events ? planned_events : 1) {
  if (schedule_.sigma0 <= 0.0) {
    schedule_.sigma0 = std::sqrt(static_cast<double>(num_subspaces)) / 4.0;
  }
  if (schedule_.sigma0 < schedule_.sigma_final) {
    schedule_.sigma0 = schedule_.sigma_final;
  }
}

namespace {
double interp_exp(double v0, double v1, double frac) {
  return v0 * std::pow(v1 / v0, frac);
}
}  // namespace

double Trainer::learning_rate() const {
  const double frac = std::min(
      1.0, static_cast<double>(consumed_) / static_cast<double>(planned_));
  return interp_exp(schedule_.lr0, schedule_.lr_final, frac);
}

double Trainer::sigma() const {
  const double frac = std::min(
      1.0, static_cast<double>(consumed_) / static_cast<double>(planned_));
  return interp_exp(schedule_.sigma0, schedule_.sigma_final, frac);
}

const NeighborhoodMatrix& Trainer::neighborhood(const SubspaceBank& bank) {
  const double s = sigma();
  if (cached_.nodes != bank.nodes() ||
      std::abs(s - cached_.sigma) > 0.01 * cached_.sigma) {
    cached_ = neighborhood_matrix(bank, s);
  }
  return cached_;
}

namespace {

struct RegionState {
  LeakySurface surface;
  std::vector<double> gamma;
  std::uint64_t t_prev = 0;
};

EventStream run_layer_impl(const LayerConfig& config,
                           const SubspaceBank& bank, const EventStream& input,
                           SubspaceBank* mutable_bank, Trainer* trainer,
                           LayerRunStats* stats, const SampleSink* sink,
                           const EmissionModel& encode_emission) {
  config.validate();
  if (input.geometry().num_types != config.input_types) {
    fail(errc::geometry_mismatch,
         "stream carries " + std::to_string(input.geometry().num_types) +
             " event types, layer expects " +
             std::to_string(config.input_types));
  }
  if (bank.dim() != config.dim() || bank.nodes() != config.num_subspaces) {
    fail(errc::bank_shape_mismatch,
         "bank is " + std::to_string(bank.nodes()) + "x" +
             std::to_string(bank.dim()) + ", layer needs " +
             std::to_string(config.num_subspaces) + "x" +
             std::to_string(config.dim()));
  }

  const RegionGrid grid =
      tile_regions(input.geometry(), config.patch_width, config.stride);
  const int r_count = config.num_subspaces;
  const double uniform_gamma = 1.0 / static_cast<double>(r_count);

  std::vector<RegionState> regions(static_cast<std::size_t>(grid.count()));
  for (auto& rs : regions) {
    rs.surface =
        LeakySurface(config.patch_width, config.input_types, config.tau_f_us);
    rs.gamma.assign(static_cast<std::size_t>(r_count), uniform_gamma);
  }

  const EmissionModel emission =
      trainer ? trainer->emission() : encode_emission;
  const bool track_boundaries =
      trainer && trainer->schedule().reset_gamma_at_boundaries &&
      trainer->schedule().presentation_interval_us > 0.0;
  double next_boundary =
      track_boundaries ? trainer->schedule().presentation_interval_us : 0.0;

  std::vector<double> resp(static_cast<std::size_t>(r_count));
  std::vector<Event> out;

  for (const Event& ev : input.events()) {
    if (track_boundaries) {
      while (static_cast<double>(ev.t) >= next_boundary) {
        for (auto& rs : regions) {
          for (double& g : rs.gamma) g = uniform_gamma;
        }
        next_boundary += trainer->schedule().presentation_interval_us;
      }
    }
    const auto sx = grid.cover_x(ev.x);
    const auto sy = grid.cover_y(ev.y);
    for (int ky = sy.lo; ky <= sy.hi; ++ky) {
      for (int kx = sx.lo; kx <= sx.hi; ++kx) {
        const int k = ky * grid.nx() + kx;
        RegionState& rs = regions[static_cast<std::size_t>(k)];
        rs.surface.add(ev.x - kx * config.stride, ev.y - ky * config.stride,
                       ev.p, ev.t);
        if (stats) ++stats->deliveries;
        auto sample = rs.surface.maybe_fire(config.fire_threshold, k);
        if (!sample) continue;

        response(bank, sample->x, resp);
        const double rho =
            transition_mix(sample->t, rs.t_prev, config.tau_s_us);
        forward_step_inplace(resp, rho, emission, rs.gamma);
        rs.t_prev = sample->t;

        int winner = 0;
        for (int r = 1; r < r_count; ++r) {
          if (resp[r] > resp[winner]) winner = r;
        }
        out.push_back(Event{sample->t, static_cast<std::uint16_t>(kx),
                            static_cast<std::uint16_t>(ky),
                            static_cast<std::uint16_t>(winner)});
        if (sink) (*sink)(*sample, winner);

        if (mutable_bank) {
          update_step(*mutable_bank, sample->x, rs.gamma,
                      trainer->neighborhood(*mutable_bank),
                      trainer->learning_rate());
        }
      }
    }
    if (trainer) trainer->advance(1);
    if (stats) ++stats->input_events;
  }

  if (stats) {
    stats->output_events += out.size();
    for (const auto& rs : regions) {
      stats->degenerate_drops += rs.surface.degenerate_drops();
    }
  }

  SensorGeometry out_geo{static_cast<std::uint16_t>(grid.nx()),
                         static_cast<std::uint16_t>(grid.ny()),
                         static_cast<std::uint16_t>(r_count)};
  return EventStream(out_geo, std::move(out));
}

}  // namespace

EventStream run_layer(const LayerConfig& config, SubspaceBank& bank,
                      const EventStream& input, RunMode mode, Trainer* trainer,
                      LayerRunStats* stats, const SampleSink* sink) {
  if (mode == RunMode::kTrain) {
    if (!trainer) fail(errc::invalid_argument, "training needs a Trainer");
    return run_layer_impl(config, bank, input, &bank, trainer, stats, sink,
                          {});
  }
  return run_layer_impl(config, bank, input, nullptr, nullptr, stats, sink,
                        {});
}

EventStream encode_layer(const LayerConfig& config, const SubspaceBank& bank,
                         const EventStream& input, LayerRunStats* stats,
                         const SampleSink* sink,
                         const EmissionModel& emission) {
  return run_layer_impl(config, bank, input, nullptr, nullptr, stats, sink,
                        emission);
}

void validate_chain(const std::vector<LayerConfig>& configs) {
  if (configs.empty()) fail(errc::bad_config, "no layers configured");
  for (auto& c : configs) c.validate();
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (configs[i].input_types != configs[i - 1].num_subspaces) {
      fail(errc::chain_mismatch,
           "layer " + std::to_string(i + 1) + " expects " +
               std::to_string(configs[i].input_types) +
               " input types but layer " + std::to_string(i) + " emits " +
               std::to_string(configs[i - 1].num_subspaces));
    }
  }
}

std::vector<SubspaceBank> train_network(const std::vector<LayerConfig>& configs,
                                        const EventStream& input, int epochs,
                                        std::uint64_t seed,
                                        const TrainSchedule& schedule,
                                        std::vector<LayerRunStats>* stats) {
  validate_chain(configs);
  if (epochs < 1) fail(errc::invalid_argument, "epochs must be >= 1");
  if (stats) stats->assign(configs.size(), {});

  std::vector<SubspaceBank> banks;
  banks.reserve(configs.size());
  EventStream current = input;
  for (std::size_t layer = 0; layer < configs.size(); ++layer) {
    const LayerConfig& cfg = configs[layer];
    SubspaceBank bank = init_bank(cfg.num_subspaces, cfg.dim(),
                                  cfg.subspace_dim, mix_seed(seed, layer));
    Trainer trainer(schedule,
                    static_cast<std::uint64_t>(current.size()) * epochs,
                    cfg.num_subspaces);
    for (int e = 0; e < epochs; ++e) {
      run_layer(cfg, bank, current, RunMode::kTrain, &trainer,
                stats ? &(*stats)[layer] : nullptr);
    }
    if (layer + 1 < configs.size()) {
      current = encode_layer(cfg, bank, current);
    }
    banks.push_back(std::move(bank));
  }
  return banks;
}

std::vector<EventStream> encode_network(const std::vector<LayerConfig>& configs,
                                        const std::vector<SubspaceBank>& banks,
                                        const EventStream& input) {
  validate_chain(configs);
  if (banks.size() != configs.size()) {
    fail(errc::bank_shape_mismatch, "have " + std::to_string(banks.size()) +
                                        " banks for " +
                                        std::to_string(configs.size()) +
                                        " layers");
  }
  std::vector<EventStream> outputs;
  outputs.reserve(configs.size());
  const EventStream* current = &input;
  for (std::size_t layer = 0; layer < configs.size(); ++layer) {
    outputs.push_back(encode_layer(configs[layer], banks[layer], *current));
    current = &outputs.back();
  }
  return outputs;
}

}  // namespace evgassom
