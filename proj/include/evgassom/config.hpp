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

#include <string>
#include <vector>

#include "evgassom/pipeline.hpp"

namespace evgassom {

// Text configuration: `key = value` lines under [layer.1], [layer.2], ...
// sections whose keys match the LayerConfig field names, plus an optional
// [train] section for schedule overrides. tau_f/tau_s and
// presentation_interval accept `us` and `ms` suffixes (bare numbers are
// microseconds).
struct NetworkConfig {
  std::vector<LayerConfig> layers;
  TrainSchedule train;
};

NetworkConfig parse_network_config(const std::string& text);
std::string format_network_config(const NetworkConfig& config);

NetworkConfig load_network_config(const std::string& path);
void save_network_config(const std::string& path, const NetworkConfig& config);

// A trained network persists as a directory: network.cfg plus one
// bank_layer<N>.gsb file per layer. Loading checks each bank's shape
// against its layer config.
void save_network(const std::string& dir, const NetworkConfig& config,
                  const std::vector<SubspaceBank>& banks);
std::pair<NetworkConfig, std::vector<SubspaceBank>> load_network(
    const std::string& dir);

}  // namespace evgassom
