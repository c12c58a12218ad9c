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

#include "evgassom/classify.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "evgassom/rng.hpp"

#include "json.hpp"

namespace evgassom {

Histogram histogram(const EventStream& stream, int num_bins) {
  if (num_bins < 1) fail(errc::invalid_argument, "need at least one bin");
  Histogram h;
  h.bins.assign(static_cast<std::size_t>(num_bins), 0.0);
  for (const Event& e : stream.events()) {
    if (e.p >= static_cast<std::uint16_t>(num_bins)) {
      fail(errc::out_of_range_coordinate,
           "event type " + std::to_string(e.p) + " >= " +
               std::to_string(num_bins) + " bins");
    }
    h.bins[e.p] += 1.0;
  }
  h.total_events = stream.size();
  if (h.total_events > 0) {
    const double inv = 1.0 / static_cast<double>(h.total_events);
    for (double& b : h.bins) b *= inv;
  }
  return h;
}

double intersection_distance(const Histogram& a, const Histogram& b) {
  if (a.bins.size() != b.bins.size()) {
    fail(errc::length_mismatch,
         "histograms of " + std::to_string(a.bins.size()) + " and " +
             std::to_string(b.bins.size()) + " bins");
  }
  double overlap = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    overlap += std::min(a.bins[i], b.bins[i]);
  }
  return 1.0 - overlap;
}

Histogram concat_normalized(std::span<const Histogram> parts) {
  Histogram out;
  for (const Histogram& p : parts) {
    out.bins.insert(out.bins.end(), p.bins.begin(), p.bins.end());
    out.total_events += p.total_events;
  }
  double sum = 0.0;
  for (double b : out.bins) sum += b;
  if (sum > 0.0) {
    for (double& b : out.bins) b /= sum;
  }
  return out;
}

std::size_t nn_classify_index(const std::vector<LabeledSample>& training,
                              const Histogram& query) {
  if (training.empty()) {
    fail(errc::empty_training_set, "nearest neighbor needs training samples");
  }
  std::size_t best = 0;
  double best_d = intersection_distance(training[0].feature, query);
  for (std::size_t i = 1; i < training.size(); ++i) {
    const double d = intersection_distance(training[i].feature, query);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

const std::string& nn_classify(const std::vector<LabeledSample>& training,
                               const Histogram& query) {
  return training[nn_classify_index(training, query)].label;
}

namespace {

std::vector<std::string> class_list(const std::vector<LabeledSample>& a,
                                    const std::vector<LabeledSample>& b) {
  std::vector<std::string> classes;
  for (const auto* set : {&a, &b}) {
    for (const LabeledSample& s : *set) {
      if (std::find(classes.begin(), classes.end(), s.label) ==
          classes.end()) {
        classes.push_back(s.label);
      }
    }
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

void classify_block(const std::vector<LabeledSample>& train,
                    const std::vector<LabeledSample>& test, std::size_t begin,
                    std::size_t end, std::vector<std::size_t>& predictions) {
  for (std::size_t i = begin; i < end; ++i) {
    predictions[i] = nn_classify_index(train, test[i].feature);
  }
}

std::vector<std::size_t> classify_all(const std::vector<LabeledSample>& train,
                                      const std::vector<LabeledSample>& test,
                                      int num_threads) {
  std::vector<std::size_t> predictions(test.size());
  const std::size_t n = test.size();
  if (num_threads <= 1 || n < 2) {
    classify_block(train, test, 0, n, predictions);
    return predictions;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(classify_block, std::cref(train), std::cref(test),
                      begin, end, std::ref(predictions));
  }
  for (auto& t : pool) t.join();
  return predictions;
}

}  // namespace

EvalReport evaluate_fixed(const std::vector<LabeledSample>& train,
                          const std::vector<LabeledSample>& test,
                          int num_threads) {
  if (train.empty() || test.empty()) {
    fail(errc::too_few_samples, "fixed split needs both train and test sets");
  }
  EvalReport report;
  report.classes = class_list(train, test);
  const std::size_t c = report.classes.size();
  report.confusion.assign(c, std::vector<int>(c, 0));
  auto class_of = [&](const std::string& label) {
    return static_cast<std::size_t>(
        std::find(report.classes.begin(), report.classes.end(), label) -
        report.classes.begin());
  };

  const std::vector<std::size_t> predictions =
      classify_all(train, test, num_threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::string& predicted = train[predictions[i]].label;
    if (predicted == test[i].label) ++correct;
    ++report.confusion[class_of(test[i].label)][class_of(predicted)];
    if (test[i].feature.total_events == 0) ++report.zero_feature_queries;
  }
  report.accuracy =
      static_cast<double>(correct) / static_cast<double>(test.size());
  report.fold_accuracies = {report.accuracy};
  return report;
}

EvalReport evaluate_kfold(const std::vector<LabeledSample>& samples, int folds,
                          std::uint64_t seed, int num_threads) {
  if (folds < 2) fail(errc::invalid_argument, "need at least 2 folds");
  if (samples.size() < 2) {
    fail(errc::too_few_samples, "cross validation needs at least 2 samples");
  }
  std::vector<std::string> classes = class_list(samples, {});
  if (classes.size() < 2) {
    fail(errc::too_few_samples, "cross validation needs at least 2 classes");
  }

  // Stratified assignment: shuffle each class's samples, deal them
  // round-robin into folds.
  std::vector<int> fold_of(samples.size(), 0);
  Rng rng(seed);
  for (const std::string& cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].label == cls) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[members[i]] = static_cast<int>(i % folds);
    }
  }

  EvalReport report;
  report.classes = classes;
  const std::size_t c = classes.size();
  report.confusion.assign(c, std::vector<int>(c, 0));
  auto class_of = [&](const std::string& label) {
    return static_cast<std::size_t>(
        std::find(classes.begin(), classes.end(), label) - classes.begin());
  };

  for (int f = 0; f < folds; ++f) {
    std::vector<LabeledSample> train, test;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (fold_of[i] == f ? test : train).push_back(samples[i]);
    }
    if (test.empty() || train.empty()) continue;
    const std::vector<std::size_t> predictions =
        classify_all(train, test, num_threads);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const std::string& predicted = train[predictions[i]].label;
      if (predicted == test[i].label) ++correct;
      ++report.confusion[class_of(test[i].label)][class_of(predicted)];
      if (test[i].feature.total_events == 0) ++report.zero_feature_queries;
    }
    report.fold_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(test.size()));
  }
  double sum = 0.0;
  for (double a : report.fold_accuracies) sum += a;
  report.accuracy = report.fold_accuracies.empty()
                        ? 0.0
                        : sum / static_cast<double>(report.fold_accuracies.size());
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["classes"] = report.classes;
  j["confusion"] = report.confusion;
  j["fold_accuracies"] = report.fold_accuracies;
  j["zero_feature_queries"] = report.zero_feature_queries;
  return j.dump(2);
}

void write_features_csv(std::ostream& out,
                        const std::vector<LabeledSample>& samples) {
  out.precision(17);
  for (const LabeledSample& s : samples) {
    out << s.label;
    for (double b : s.feature.bins) out << ',' << b;
    out << '\n';
  }
}

std::vector<LabeledSample> read_features_csv(std::istream& in) {
  std::vector<LabeledSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    LabeledSample s;
    if (!std::getline(ls, s.label, ',')) {
      fail(errc::bad_config, "bad feature row at line " + std::to_string(lineno));
    }
    std::string field;
    while (std::getline(ls, field, ',')) {
      try {
        s.feature.bins.push_back(std::stod(field));
      } catch (const std::exception&) {
        fail(errc::bad_config,
             "bad feature value at line " + std::to_string(lineno));
      }
    }
    if (s.feature.bins.empty()) {
      fail(errc::bad_config, "feature row without bins at line " +
                                 std::to_string(lineno));
    }
    double sum = 0.0;
    for (double b : s.feature.bins) sum += b;
    s.feature.total_events = sum > 0.0 ? 1 : 0;  // raw count not stored
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace evgassom
