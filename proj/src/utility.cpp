// Copyright 2026 The Authors.
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

#include "imuplace/utility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "imuplace/error.hpp"
#include "imuplace/parallel.hpp"

namespace imuplace {

UtilityMatrix::UtilityMatrix(std::vector<int> locations,
                             std::vector<std::string> activities)
    : locations_(std::move(locations)),
      activities_(std::move(activities)),
      f1_(locations_.size() * activities_.size(), 0.0) {}

std::optional<std::size_t> UtilityMatrix::RowOf(int location) const {
  const auto it = std::find(locations_.begin(), locations_.end(), location);
  if (it == locations_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - locations_.begin());
}

std::optional<std::size_t> UtilityMatrix::ColumnOf(
    const std::string& activity) const {
  const auto it = std::find(activities_.begin(), activities_.end(), activity);
  if (it == activities_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - activities_.begin());
}

void UtilityMatrix::Validate() const {
  if (std::set<int>(locations_.begin(), locations_.end()).size() !=
      locations_.size()) {
    throw Error(ErrorCode::kInvalidInput, "duplicate location id");
  }
  if (std::set<std::string>(activities_.begin(), activities_.end()).size() !=
      activities_.size()) {
    throw Error(ErrorCode::kInvalidInput, "duplicate activity label");
  }
  for (double v : f1_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidInput, "F1 entry outside [0, 1]");
    }
  }
}

std::vector<FeatureVector> FeaturizeTraces(
    const LabeledTraceSet& set, const EvalConfig& cfg,
    std::vector<std::string>* sequence_ids) {
  std::vector<FeatureVector> out;
  for (const LabeledTrace& entry : set) {
    for (const Window& w :
         WindowTrace(entry.trace, cfg.window_s, cfg.overlap)) {
      FeatureVector fv = ExtractFeatures(w, entry.trace.rate, cfg.features);
      fv.activity = entry.activity;
      out.push_back(std::move(fv));
      if (sequence_ids != nullptr) sequence_ids->push_back(entry.sequence_id);
    }
  }
  return out;
}

std::vector<double> EvaluateLocation(const LabeledTraceSet& set,
                                     const std::vector<std::string>& activities,
                                     const EvalConfig& cfg) {
  if (cfg.folds < 2) {
    throw Error(ErrorCode::kInvalidInput, "need at least 2 folds");
  }
  std::vector<std::string> sequence_of;
  const std::vector<FeatureVector> features =
      FeaturizeTraces(set, cfg, &sequence_of);

  // Stratified grouping: the sequences of each activity are dealt
  // round-robin over the folds in sorted id order.
  std::map<std::string, std::set<std::string>> sequences;
  for (const LabeledTrace& entry : set) {
    sequences[entry.activity].insert(entry.sequence_id);
  }
  int folds = cfg.folds;
  for (const std::string& a : activities) {
    const auto it = sequences.find(a);
    const std::size_t count = it == sequences.end() ? 0 : it->second.size();
    if (count < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "activity '" + a + "' has " + std::to_string(count) +
                      " sequence(s); cross validation needs 2");
    }
    folds = std::min(folds, static_cast<int>(count));
  }
  std::map<std::string, int> fold_of;
  for (const auto& [activity, ids] : sequences) {
    int pos = 0;
    for (const std::string& id : ids) fold_of[id] = pos++ % folds;
  }

  std::vector<double> sum(activities.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
    for (std::size_t i = 0; i < features.size(); ++i) {
      (fold_of[sequence_of[i]] == f ? test : train).push_back(features[i]);
    }
    for (const std::string& a : activities) {
      const auto has = [&](const FeatureVector& fv) {
        return fv.activity == a;
      };
      if (std::none_of(test.begin(), test.end(), has)) {
        throw Error(ErrorCode::kInsufficientData,
                    "activity '" + a + "' has no windows in fold " +
                        std::to_string(f));
      }
    }
    const LogisticModel model = TrainClassifier(train, cfg.train);
    const F1Report report = EvaluateF1(model, test);
    for (std::size_t t = 0; t < activities.size(); ++t) {
      sum[t] += std::max(0.0, report.F1For(activities[t]));
    }
  }
  for (double& s : sum) s /= static_cast<double>(folds);
  return sum;
}

UtilityMatrix ComputeUtilityMatrix(const std::map<int, LabeledTraceSet>& data,
                                   const PatchSet& patches,
                                   const EvalConfig& cfg, int jobs) {
  std::set<std::string> labels;
  for (const auto& [id, set] : data) {
    for (const LabeledTrace& e : set) labels.insert(e.activity);
  }
  if (labels.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels,
                std::to_string(labels.size()) +
                    " activity label(s); classification needs 2");
  }
  std::vector<int> locations;
  for (const SurfacePatch& p : patches.patches) locations.push_back(p.id);
  const std::vector<std::string> activities(labels.begin(), labels.end());
  UtilityMatrix matrix(locations, activities);

  ParallelFor(locations.size(), jobs, [&](std::size_t row) {
    const int id = locations[row];
    try {
      const auto it = data.find(id);
      if (it == data.end()) {
        throw Error(ErrorCode::kInsufficientData, "no traces");
      }
      const std::vector<double> f1 = EvaluateLocation(it->second, activities,
                                                      cfg);
      for (std::size_t t = 0; t < f1.size(); ++t) matrix.at(row, t) = f1[t];
    } catch (const Error& e) {
      throw e.WithContext("patch " + std::to_string(id));
    }
  });
  return matrix;
}

LocationRanking RankLocations(const UtilityMatrix& matrix,
                              const std::string& activity) {
  const auto col = matrix.ColumnOf(activity);
  if (!col) {
    throw Error(ErrorCode::kUnknownActivity, "'" + activity + "'");
  }
  std::vector<double> scores(matrix.location_count());
  for (std::size_t r = 0; r < scores.size(); ++r) {
    scores[r] = matrix.at(r, *col);
  }

  LocationRanking ranking;
  std::vector<std::size_t> rows(scores.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return matrix.locations()[a] < matrix.locations()[b];
  });
  for (std::size_t r : rows) ranking.order.push_back(matrix.locations()[r]);

  // Rank 1 is the best location: rank ascending on negated scores.
  std::vector<double> negated(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) negated[r] = -scores[r];
  ranking.ranks = AverageRanks(negated);
  return ranking;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < 3) {
    throw Error(ErrorCode::kInvalidInput, "need at least 3 values");
  }
  const std::vector<double> ra = AverageRanks(a);
  const std::vector<double> rb = AverageRanks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean_a) * (rb[i] - mean_b);
    var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
    var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw Error(ErrorCode::kZeroVariance, "all values tied");
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

}  // namespace imuplace
