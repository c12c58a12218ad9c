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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "evgassom/classify.hpp"
#include "evgassom/config.hpp"
#include "evgassom/drift_sim.hpp"
#include "evgassom/events.hpp"
#include "evgassom/image.hpp"
#include "evgassom/pipeline.hpp"
#include "evgassom/rng.hpp"
#include "evgassom/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

void write_manifest(const GlobalOpts& g, const std::string& command,
                    const json& inputs, const json& parameters,
                    const json& outputs) {
  json m;
  m["tool"] = "evgassom";
  m["version"] = EVGASSOM_VERSION;
  m["command"] = command;
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["config"] = g.config;
  m["inputs"] = inputs;
  m["parameters"] = parameters;
  m["outputs"] = outputs;
  std::ofstream out(fs::path(g.out) / "manifest.json", std::ios::trunc);
  out << m.dump(2) << "\n";
}

// "WxHxP", e.g. 128x128x2; needed to load csv/bin streams.
evgassom::SensorGeometry parse_geometry(const std::string& spec) {
  unsigned w = 0, h = 0, p = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> w >> c1 >> h >> c2 >> p) || c1 != 'x' || c2 != 'x' || !w || !h ||
      !p) {
    evgassom::fail(evgassom::errc::invalid_argument,
                   "expected WxHxP geometry, got '" + spec + "'");
  }
  return {static_cast<std::uint16_t>(w), static_cast<std::uint16_t>(h),
          static_cast<std::uint16_t>(p)};
}

evgassom::EventStream load_input(const std::string& path,
                                 const std::string& geometry) {
  if (!geometry.empty()) {
    return evgassom::load_stream(path, parse_geometry(geometry));
  }
  return evgassom::load_stream(path);
}

// Sample lists are `label,path` lines; relative paths resolve against the
// list file's directory.
std::vector<std::pair<std::string, std::string>> read_sample_list(
    const std::string& list_path) {
  std::ifstream in(list_path);
  if (!in) evgassom::fail(evgassom::errc::io_error, "cannot open " + list_path);
  const fs::path base = fs::path(list_path).parent_path();
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      evgassom::fail(evgassom::errc::bad_config,
                     "expected label,path in " + list_path + ": " + line);
    }
    std::string label = line.substr(0, comma);
    fs::path p = line.substr(comma + 1);
    if (p.is_relative()) p = base / p;
    out.emplace_back(label, p.string());
  }
  return out;
}

std::vector<int> parse_layer_selection(const std::string& spec,
                                       std::size_t num_layers) {
  std::vector<int> layers;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, '+')) {
    int idx = 0;
    try {
      idx = std::stoi(part);
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx < 1 || static_cast<std::size_t>(idx) > num_layers) {
      evgassom::fail(evgassom::errc::invalid_argument,
                     "bad layer selection '" + spec + "' for " +
                         std::to_string(num_layers) + " layers");
    }
    layers.push_back(idx - 1);
  }
  if (layers.empty()) {
    evgassom::fail(evgassom::errc::invalid_argument,
                   "empty layer selection");
  }
  return layers;
}

// Encode a set of labeled streams into histogram features, parallel over
// streams (the banks are read-only).
std::vector<evgassom::LabeledSample> extract_features(
    const std::vector<std::pair<std::string, std::string>>& items,
    const evgassom::NetworkConfig& config,
    const std::vector<evgassom::SubspaceBank>& banks,
    const std::vector<int>& layers, int threads) {
  std::vector<evgassom::LabeledSample> samples(items.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](std::size_t begin, std::size_t end) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        const evgassom::EventStream stream =
            evgassom::load_stream(items[i].second);
        const auto outputs =
            evgassom::encode_network(config.layers, banks, stream);
        std::vector<evgassom::Histogram> parts;
        parts.reserve(layers.size());
        for (int layer : layers) {
          parts.push_back(evgassom::histogram(
              outputs[static_cast<std::size_t>(layer)],
              config.layers[static_cast<std::size_t>(layer)].num_subspaces));
        }
        samples[i].feature = parts.size() == 1
                                 ? std::move(parts[0])
                                 : evgassom::concat_normalized(parts);
        samples[i].label = items[i].first;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  const std::size_t n = items.size();
  if (threads <= 1 || n < 2) {
    work(0, n);
  } else {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return samples;
}

int run_simulate(const GlobalOpts& g, const std::string& image_dir,
                 evgassom::DriftParams drift, evgassom::DvsParams dvs,
                 double interval_s, double rotate_fraction,
                 double rotation_range) {
  evgassom::StimulusProgram program;
  program.images = evgassom::load_image_dir(image_dir);
  if (program.images.empty()) {
    evgassom::fail(evgassom::errc::empty_program,
                   "no .pgm/.png images in " + image_dir);
  }
  program.presentation_interval_s = interval_s;
  program.rotate_fraction = rotate_fraction;
  program.rotation_range_deg = rotation_range;
  program.seed = evgassom::mix_seed(g.seed, 1);
  drift.seed = evgassom::mix_seed(g.seed, 0);
  dvs.noise_seed = evgassom::mix_seed(g.seed, 2);

  const auto trajectory =
      evgassom::gen_drift_trajectory(drift, program.duration_s());
  const evgassom::EventStream stream = evgassom::render_events(
      program, trajectory, dvs, drift.pixels_per_degree);

  fs::create_directories(g.out);
  const std::string out_path = (fs::path(g.out) / "stream.evs").string();
  evgassom::save_stream(out_path, stream);
  write_manifest(
      g, "simulate", {{"images", image_dir}},
      {{"interval_s", interval_s},
       {"rotate_fraction", rotate_fraction},
       {"rotation_range_deg", rotation_range},
       {"diffusion_arcmin2_per_s", drift.diffusion_arcmin2_per_s},
       {"step_dt_s", drift.step_dt_s},
       {"boundary", drift.boundary},
       {"boundary_unit",
        drift.boundary_unit == evgassom::DriftParams::BoundaryUnit::kDegrees
            ? "deg"
            : "arcmin"},
       {"pixels_per_degree", drift.pixels_per_degree},
       {"contrast_threshold", dvs.contrast_threshold},
       {"intensity_floor", dvs.intensity_floor},
       {"background_rate_hz", dvs.background_rate_hz},
       {"sensor_width", dvs.sensor.width},
       {"sensor_height", dvs.sensor.height}},
      {"stream.evs"});
  std::cout << "simulate: " << stream.size() << " events over "
            << program.duration_s() << " s -> " << out_path << "\n";
  return 0;
}

int run_train(const GlobalOpts& g, const std::string& input,
              const std::string& geometry, int epochs) {
  if (g.config.empty()) {
    evgassom::fail(evgassom::errc::invalid_argument,
                   "train needs --config");
  }
  evgassom::NetworkConfig config = evgassom::load_network_config(g.config);
  const evgassom::EventStream stream = load_input(input, geometry);
  if (stream.empty()) {
    std::cerr << "warning: input stream has no events; banks stay at their "
                 "random initialization\n";
  }
  std::vector<evgassom::LayerRunStats> stats;
  const auto banks = evgassom::train_network(config.layers, stream, epochs,
                                             g.seed, config.train, &stats);
  fs::create_directories(g.out);
  evgassom::save_network(g.out, config, banks);
  json outputs = json::array({"network.cfg"});
  for (std::size_t i = 0; i < banks.size(); ++i) {
    outputs.push_back("bank_layer" + std::to_string(i + 1) + ".gsb");
    std::cout << "layer " << (i + 1) << ": " << stats[i].input_events
              << " input events, " << stats[i].output_events
              << " output events, " << stats[i].degenerate_drops
              << " degenerate drops\n";
  }
  write_manifest(g, "train", {{"stream", input}}, {{"epochs", epochs}},
                 outputs);
  return 0;
}

int run_encode(const GlobalOpts& g, const std::string& network_dir,
               const std::string& input, const std::string& geometry) {
  auto [config, banks] = evgassom::load_network(network_dir);
  const evgassom::EventStream stream = load_input(input, geometry);
  const auto outputs = evgassom::encode_network(config.layers, banks, stream);
  fs::create_directories(g.out);
  json out_names = json::array();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string name = "layer" + std::to_string(i + 1) + ".evs";
    evgassom::save_stream((fs::path(g.out) / name).string(), outputs[i]);
    out_names.push_back(name);
    std::cout << "layer " << (i + 1) << ": " << outputs[i].size()
              << " output events\n";
  }
  write_manifest(g, "encode",
                 {{"network", network_dir}, {"stream", input}}, json::object(),
                 out_names);
  return 0;
}

int run_classify(const GlobalOpts& g, const std::string& network_dir,
                 const std::string& train_list, const std::string& test_list,
                 const std::string& features_train,
                 const std::string& features_test,
                 const std::string& layer_spec, const std::string& protocol,
                 int folds) {
  std::vector<evgassom::LabeledSample> train_samples, test_samples;
  if (!features_train.empty()) {
    std::ifstream in(features_train);
    if (!in) {
      evgassom::fail(evgassom::errc::io_error,
                     "cannot open " + features_train);
    }
    train_samples = evgassom::read_features_csv(in);
    if (!features_test.empty()) {
      std::ifstream tin(features_test);
      if (!tin) {
        evgassom::fail(evgassom::errc::io_error,
                       "cannot open " + features_test);
      }
      test_samples = evgassom::read_features_csv(tin);
    }
  } else {
    if (network_dir.empty() || train_list.empty()) {
      evgassom::fail(evgassom::errc::invalid_argument,
                     "classify needs --network and --train (or feature csvs)");
    }
    auto [config, banks] = evgassom::load_network(network_dir);
    const auto layers = parse_layer_selection(layer_spec, config.layers.size());
    train_samples = extract_features(read_sample_list(train_list), config,
                                     banks, layers, g.threads);
    if (!test_list.empty()) {
      test_samples = extract_features(read_sample_list(test_list), config,
                                      banks, layers, g.threads);
    }
  }

  evgassom::EvalReport report;
  if (protocol == "kfold") {
    report = evgassom::evaluate_kfold(train_samples, folds, g.seed, g.threads);
  } else if (protocol == "fixed") {
    report = evgassom::evaluate_fixed(train_samples, test_samples, g.threads);
  } else {
    evgassom::fail(evgassom::errc::invalid_argument,
                   "protocol must be fixed or kfold");
  }

  fs::create_directories(g.out);
  {
    std::ofstream out(fs::path(g.out) / "report.json", std::ios::trunc);
    out << evgassom::report_to_json(report) << "\n";
  }
  {
    std::ofstream out(fs::path(g.out) / "features_train.csv", std::ios::trunc);
    evgassom::write_features_csv(out, train_samples);
  }
  if (!test_samples.empty()) {
    std::ofstream out(fs::path(g.out) / "features_test.csv", std::ios::trunc);
    evgassom::write_features_csv(out, test_samples);
  }
  write_manifest(g, "classify",
                 {{"network", network_dir},
                  {"train", train_list},
                  {"test", test_list},
                  {"features_train", features_train},
                  {"features_test", features_test}},
                 {{"layers", layer_spec},
                  {"protocol", protocol},
                  {"folds", folds}},
                 {"report.json", "features_train.csv", "features_test.csv"});
  std::cout << "accuracy " << report.accuracy << "\n";
  return 0;
}

int run_inspect(const GlobalOpts& g, const std::string& network_dir,
                bool second_layer) {
  auto [config, banks] = evgassom::load_network(network_dir);
  fs::create_directories(g.out);
  std::string name;
  if (second_layer) {
    if (config.layers.size() < 2) {
      evgassom::fail(evgassom::errc::chain_mismatch,
                     "network has no second layer");
    }
    const auto img = evgassom::export_layer2_composite(
        banks[1], banks[0], config.layers[1], config.layers[0]);
    name = "layer2_composite.pgm";
    evgassom::write_pgm((fs::path(g.out) / name).string(), img);
  } else {
    const auto img = evgassom::export_layer1_grid(banks[0], config.layers[0]);
    name = "layer1_grid.pgm";
    evgassom::write_pgm((fs::path(g.out) / name).string(), img);
  }
  write_manifest(g, second_layer ? "inspect-l2" : "inspect-l1",
                 {{"network", network_dir}}, json::object(), {name});
  std::cout << "wrote " << (fs::path(g.out) / name).string() << "\n";
  return 0;
}

int run_bench(const GlobalOpts& g, const std::string& network_dir,
              const std::string& input, const std::string& geometry,
              bool write_out) {
  auto [config, banks] = evgassom::load_network(network_dir);
  const evgassom::EventStream stream = load_input(input, geometry);
  json layers = json::array();
  const evgassom::EventStream* current = &stream;
  std::vector<evgassom::EventStream> outputs;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    outputs.push_back(
        evgassom::encode_layer(config.layers[i], banks[i], *current));
    const auto stop = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration<double>(stop - start).count();
    const double rate =
        secs > 0.0 ? static_cast<double>(current->size()) / secs : 0.0;
    std::cout << "layer " << (i + 1) << ": " << current->size()
              << " input events in " << secs << " s = " << rate
              << " events/s\n";
    layers.push_back({{"layer", i + 1},
                      {"input_events", current->size()},
                      {"seconds", secs},
                      {"events_per_second", rate}});
    current = &outputs.back();
  }
  if (write_out) {
    fs::create_directories(g.out);
    std::ofstream out(fs::path(g.out) / "bench.json", std::ios::trunc);
    out << layers.dump(2) << "\n";
    write_manifest(g, "bench",
                   {{"network", network_dir}, {"stream", input}},
                   json::object(), {"bench.json"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-stream feature learning with subspace maps"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "network configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads where supported");
  app.add_option("--out", g.out, "output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "synthesize a drift event stream from images");
  sim->fallthrough();
  std::string image_dir;
  evgassom::DriftParams drift;
  evgassom::DvsParams dvs;
  dvs.sensor = {128, 128, 2};
  double interval_s = 2.0, rotate_fraction = 0.3, rotation_range = 180.0;
  std::string boundary_unit = "deg";
  int sensor_w = 128, sensor_h = 128;
  sim->add_option("--images", image_dir, "directory of grayscale images")
      ->required();
  sim->add_option("--interval", interval_s, "seconds per image");
  sim->add_option("--rotate-fraction", rotate_fraction,
                  "fraction of images shown rotated");
  sim->add_option("--rotation-range", rotation_range,
                  "max rotation angle, degrees");
  sim->add_option("--diffusion", drift.diffusion_arcmin2_per_s,
                  "drift diffusion constant, arcmin^2/s");
  sim->add_option("--step-dt", drift.step_dt_s, "drift step, seconds");
  sim->add_option("--boundary", drift.boundary, "drift reset boundary");
  sim->add_option("--boundary-unit", boundary_unit, "deg or arcmin");
  sim->add_option("--ppd", drift.pixels_per_degree, "pixels per degree");
  sim->add_option("--contrast", dvs.contrast_threshold,
                  "log-intensity contrast threshold");
  sim->add_option("--floor", dvs.intensity_floor,
                  "intensity floor added before the log");
  sim->add_option("--background-rate", dvs.background_rate_hz,
                  "noise events per pixel per second");
  sim->add_option("--width", sensor_w, "sensor width");
  sim->add_option("--height", sensor_h, "sensor height");

  // train
  auto* train = app.add_subcommand("train", "train a network on a stream");
  train->fallthrough();
  std::string train_input, train_geometry;
  int epochs = 1;
  train->add_option("--input", train_input, "input stream (.evs/.csv/.bin)")
      ->required();
  train->add_option("--epochs", epochs, "training passes over the stream");
  train->add_option("--geometry", train_geometry,
                    "WxHxP, required for csv/bin inputs");

  // encode
  auto* encode = app.add_subcommand("encode",
                                    "run a trained network over a stream");
  encode->fallthrough();
  std::string encode_network_dir, encode_input, encode_geometry;
  encode->add_option("--network", encode_network_dir, "trained network dir")
      ->required();
  encode->add_option("--input", encode_input, "input stream (.evs/.csv/.bin)")
      ->required();
  encode->add_option("--geometry", encode_geometry,
                     "WxHxP, required for csv/bin inputs");

  // classify
  auto* classify = app.add_subcommand("classify",
                                      "histogram nearest-neighbor evaluation");
  classify->fallthrough();
  std::string cls_network, cls_train, cls_test, cls_ftrain, cls_ftest;
  std::string layer_spec = "1", protocol = "fixed";
  int folds = 8;
  classify->add_option("--network", cls_network, "trained network dir");
  classify->add_option("--train", cls_train, "label,path list of streams");
  classify->add_option("--test", cls_test, "label,path list of streams");
  classify->add_option("--features-train", cls_ftrain,
                       "precomputed feature csv");
  classify->add_option("--features-test", cls_ftest,
                       "precomputed feature csv");
  classify->add_option("--layers", layer_spec, "feature layers, e.g. 1 or 1+2");
  classify->add_option("--protocol", protocol, "fixed or kfold");
  classify->add_option("--folds", folds, "folds for kfold");

  // inspect
  auto* il1 = app.add_subcommand("inspect-l1", "export the layer-1 basis grid");
  il1->fallthrough();
  std::string il1_network;
  il1->add_option("--network", il1_network, "trained network dir")->required();
  auto* il2 = app.add_subcommand("inspect-l2",
                                 "export the layer-2 composite image");
  il2->fallthrough();
  std::string il2_network;
  il2->add_option("--network", il2_network, "trained network dir")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "measure encode throughput");
  bench->fallthrough();
  std::string bench_network, bench_input, bench_geometry;
  bool bench_write = false;
  bench->add_option("--network", bench_network, "trained network dir")
      ->required();
  bench->add_option("--input", bench_input, "input stream (.evs/.csv/.bin)")
      ->required();
  bench->add_option("--geometry", bench_geometry,
                    "WxHxP, required for csv/bin inputs");
  bench->add_flag("--write", bench_write, "also write bench.json to --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      dvs.sensor.width = static_cast<std::uint16_t>(sensor_w);
      dvs.sensor.height = static_cast<std::uint16_t>(sensor_h);
      drift.boundary_unit =
          boundary_unit == "arcmin"
              ? evgassom::DriftParams::BoundaryUnit::kArcmin
              : evgassom::DriftParams::BoundaryUnit::kDegrees;
      return run_simulate(g, image_dir, drift, dvs, interval_s,
                          rotate_fraction, rotation_range);
    }
    if (train->parsed()) {
      return run_train(g, train_input, train_geometry, epochs);
    }
    if (encode->parsed()) {
      return run_encode(g, encode_network_dir, encode_input,
                        encode_geometry);
    }
    if (classify->parsed()) {
      return run_classify(g, cls_network, cls_train, cls_test, cls_ftrain,
                          cls_ftest, layer_spec, protocol, folds);
    }
    if (il1->parsed()) return run_inspect(g, il1_network, false);
    if (il2->parsed()) return run_inspect(g, il2_network, true);
    if (bench->parsed()) {
      return run_bench(g, bench_network, bench_input, bench_geometry,
                       bench_write);
    }
  } catch (const evgassom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == evgassom::errc::empty_program ||
            e.code() == evgassom::errc::invalid_argument)
               ? 2
               : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
