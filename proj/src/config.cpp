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

#include "evgassom/config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace evgassom {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& value, int lineno) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  fail(errc::bad_config,
       "bad numeric value '" + value + "' at line " + std::to_string(lineno));
}

// Durations: bare numbers are microseconds; `us`, `ms` and `s` suffixes
// are accepted.
double parse_duration_us(const std::string& value, int lineno) {
  std::string v = trim(value);
  double scale = 1.0;
  if (v.size() >= 2 && v.compare(v.size() - 2, 2, "us") == 0) {
    v = trim(v.substr(0, v.size() - 2));
  } else if (v.size() >= 2 && v.compare(v.size() - 2, 2, "ms") == 0) {
    scale = 1e3;
    v = trim(v.substr(0, v.size() - 2));
  } else if (v.size() >= 1 && v.back() == 's' &&
             (v.size() < 2 || !std::isalpha(static_cast<unsigned char>(
                                  v[v.size() - 2])))) {
    scale = 1e6;
    v = trim(v.substr(0, v.size() - 1));
  }
  return parse_number(v, lineno) * scale;
}

bool parse_bool(const std::string& value, int lineno) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(errc::bad_config,
       "bad boolean '" + value + "' at line " + std::to_string(lineno));
}

int parse_int(const std::string& value, int lineno) {
  double v = parse_number(value, lineno);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    fail(errc::bad_config,
         "expected integer, got '" + value + "' at line " +
             std::to_string(lineno));
  }
  return i;
}

}  // namespace

NetworkConfig parse_network_config(const std::string& text) {
  NetworkConfig cfg;
  std::map<int, LayerConfig> layers;
  std::map<int, int> layer_keys_seen;

  enum class Section { kNone, kLayer, kTrain };
  Section section = Section::kNone;
  int layer_index = 0;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        fail(errc::bad_config,
             "unterminated section at line " + std::to_string(lineno));
      }
      std::string name = trim(s.substr(1, s.size() - 2));
      if (name == "train") {
        section = Section::kTrain;
      } else if (name.rfind("layer.", 0) == 0) {
        section = Section::kLayer;
        layer_index = parse_int(name.substr(6), lineno);
        if (layer_index < 1) {
          fail(errc::bad_config,
               "layer numbers start at 1 (line " + std::to_string(lineno) +
                   ")");
        }
        layers.try_emplace(layer_index);
      } else {
        fail(errc::bad_config,
             "unknown section [" + name + "] at line " + std::to_string(lineno));
      }
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      fail(errc::bad_config,
           "expected key = value at line " + std::to_string(lineno));
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (auto hash = value.find('#'); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }

    if (section == Section::kLayer) {
      LayerConfig& lc = layers[layer_index];
      if (key == "patch_width") lc.patch_width = parse_int(value, lineno);
      else if (key == "stride") lc.stride = parse_int(value, lineno);
      else if (key == "fire_threshold") lc.fire_threshold = parse_number(value, lineno);
      else if (key == "tau_f") lc.tau_f_us = parse_duration_us(value, lineno);
      else if (key == "tau_s") lc.tau_s_us = parse_duration_us(value, lineno);
      else if (key == "num_subspaces") lc.num_subspaces = parse_int(value, lineno);
      else if (key == "subspace_dim") lc.subspace_dim = parse_int(value, lineno);
      else if (key == "input_types") lc.input_types = parse_int(value, lineno);
      else fail(errc::bad_config, "unknown layer key '" + key + "' at line " +
                                      std::to_string(lineno));
      ++layer_keys_seen[layer_index];
    } else if (section == Section::kTrain) {
      TrainSchedule& t = cfg.train;
      if (key == "kappa") t.kappa = parse_number(value, lineno);
      else if (key == "lr0") t.lr0 = parse_number(value, lineno);
      else if (key == "lr_final") t.lr_final = parse_number(value, lineno);
      else if (key == "sigma0") t.sigma0 = parse_number(value, lineno);
      else if (key == "sigma_final") t.sigma_final = parse_number(value, lineno);
      else if (key == "reset_gamma") t.reset_gamma_at_boundaries = parse_bool(value, lineno);
      else if (key == "presentation_interval") t.presentation_interval_us = parse_duration_us(value, lineno);
      else fail(errc::bad_config, "unknown train key '" + key + "' at line " +
                                      std::to_string(lineno));
    } else {
      fail(errc::bad_config,
           "key outside any section at line " + std::to_string(lineno));
    }
  }

  if (layers.empty()) fail(errc::bad_config, "no [layer.N] sections");
  int expect = 1;
  for (auto& [idx, lc] : layers) {
    if (idx != expect) {
      fail(errc::bad_config, "layer sections must be numbered 1..N without "
                             "gaps; missing [layer." +
                                 std::to_string(expect) + "]");
    }
    ++expect;
    cfg.layers.push_back(lc);
  }
  validate_chain(cfg.layers);
  return cfg;
}

std::string format_network_config(const NetworkConfig& config) {
  std::ostringstream out;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const LayerConfig& lc = config.layers[i];
    out << "[layer." << (i + 1) << "]\n";
    out << "patch_width = " << lc.patch_width << "\n";
    out << "stride = " << lc.stride << "\n";
    out << "fire_threshold = " << lc.fire_threshold << "\n";
    out << "tau_f = " << lc.tau_f_us << " us\n";
    out << "tau_s = " << lc.tau_s_us << " us\n";
    out << "num_subspaces = " << lc.num_subspaces << "\n";
    out << "subspace_dim = " << lc.subspace_dim << "\n";
    out << "input_types = " << lc.input_types << "\n\n";
  }
  const TrainSchedule& t = config.train;
  out << "[train]\n";
  out << "kappa = " << t.kappa << "\n";
  out << "lr0 = " << t.lr0 << "\n";
  out << "lr_final = " << t.lr_final << "\n";
  out << "sigma0 = " << t.sigma0 << "\n";
  out << "sigma_final = " << t.sigma_final << "\n";
  out << "reset_gamma = " << (t.reset_gamma_at_boundaries ? "true" : "false")
      << "\n";
  out << "presentation_interval = " << t.presentation_interval_us << " us\n";
  return out.str();
}

NetworkConfig load_network_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network_config(buf.str());
}

void save_network_config(const std::string& path,
                         const NetworkConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
  out << format_network_config(config);
  if (!out) fail(errc::io_error, "write failed for " + path);
}

namespace {
std::string bank_path(const std::string& dir, std::size_t layer) {
  return dir + "/bank_layer" + std::to_string(layer + 1) + ".gsb";
}
}  // namespace

void save_network(const std::string& dir, const NetworkConfig& config,
                  const std::vector<SubspaceBank>& banks) {
  if (banks.size() != config.layers.size()) {
    fail(errc::bank_shape_mismatch, "bank count does not match layer count");
  }
  std::filesystem::create_directories(dir);
  save_network_config(dir + "/network.cfg", config);
  for (std::size_t i = 0; i < banks.size(); ++i) {
    write_file(bank_path(dir, i), banks[i].serialize());
  }
}

std::pair<NetworkConfig, std::vector<SubspaceBank>> load_network(
    const std::string& dir) {
  NetworkConfig config = load_network_config(dir + "/network.cfg");
  std::vector<SubspaceBank> banks;
  banks.reserve(config.layers.size());
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    SubspaceBank bank = SubspaceBank::deserialize(read_file(bank_path(dir, i)));
    const LayerConfig& lc = config.layers[i];
    if (bank.dim() != lc.dim() || bank.nodes() != lc.num_subspaces ||
        bank.subspace_dim() != lc.subspace_dim) {
      fail(errc::bank_shape_mismatch,
           "bank " + bank_path(dir, i) + " does not match its layer config");
    }
    banks.push_back(std::move(bank));
  }
  return {std::move(config), std::move(banks)};
}

}  // namespace evgassom
