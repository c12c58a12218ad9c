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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evgassom/events.hpp"

namespace evgassom {

// Normalized event-type counts; all spatial and temporal structure is
// discarded. A zero-event recording keeps an all-zero bin vector.
struct Histogram {
  std::vector<double> bins;
  std::uint64_t total_events = 0;
};

Histogram histogram(const EventStream& stream, int num_bins);

// 1 - sum of elementwise minima; 0 for identical histograms, 1 for
// disjoint support.
double intersection_distance(const Histogram& a, const Histogram& b);

// Per-layer histograms concatenated and renormalized into one feature.
Histogram concat_normalized(std::span<const Histogram> parts);

struct LabeledSample {
  Histogram feature;
  std::string label;
};

// Label of the training sample closest to the query; ties go to the
// earliest training sample.
std::size_t nn_classify_index(const std::vector<LabeledSample>& training,
                              const Histogram& query);
const std::string& nn_classify(const std::vector<LabeledSample>& training,
                               const Histogram& query);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::string> classes;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
  std::vector<double> fold_accuracies;      // one entry for a fixed split
  int zero_feature_queries = 0;
};

EvalReport evaluate_fixed(const std::vector<LabeledSample>& train,
                          const std::vector<LabeledSample>& test,
                          int num_threads = 1);

// Seeded stratified k-fold cross validation; reports mean accuracy.
EvalReport evaluate_kfold(const std::vector<LabeledSample>& samples, int folds,
                          std::uint64_t seed, int num_threads = 1);

std::string report_to_json(const EvalReport& report);

// CSV feature sets: `label,bin_0,...,bin_{R-1}` per line.
void write_features_csv(std::ostream& out,
                        const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_features_csv(std::istream& in);

}  // namespace evgassom
