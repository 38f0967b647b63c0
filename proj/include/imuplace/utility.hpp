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

#ifndef IMUPLACE_UTILITY_HPP_
#define IMUPLACE_UTILITY_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imuplace/classifier.hpp"
#include "imuplace/features.hpp"
#include "imuplace/kinematics.hpp"
#include "imuplace/sampling.hpp"

namespace imuplace {

struct LabeledTrace {
  ImuTrace trace;
  std::string activity;
  std::optional<std::string> subject;
  std::string sequence_id;
};

using LabeledTraceSet = std::vector<LabeledTrace>;

// Row-major L x T table of F1 scores, location x activity.
class UtilityMatrix {
 public:
  UtilityMatrix() = default;
  UtilityMatrix(std::vector<int> locations, std::vector<std::string> activities);

  std::size_t location_count() const { return locations_.size(); }
  std::size_t activity_count() const { return activities_.size(); }
  const std::vector<int>& locations() const { return locations_; }
  const std::vector<std::string>& activities() const { return activities_; }

  double& at(std::size_t row, std::size_t col) {
    return f1_[row * activities_.size() + col];
  }
  double at(std::size_t row, std::size_t col) const {
    return f1_[row * activities_.size() + col];
  }

  // Row index of location id / column index of activity, if present.
  std::optional<std::size_t> RowOf(int location) const;
  std::optional<std::size_t> ColumnOf(const std::string& activity) const;

  // Labels unique, entries finite and within [0, 1].
  void Validate() const;

  bool operator==(const UtilityMatrix&) const = default;

 private:
  std::vector<int> locations_;
  std::vector<std::string> activities_;
  std::vector<double> f1_;
};

struct EvalConfig {
  double window_s = 2.0;
  double overlap = 0.5;
  int folds = 3;
  FeatureConfig features;
  TrainConfig train;
};

// Windows -> features for every trace, tagged with the entry's activity.
std::vector<FeatureVector> FeaturizeTraces(const LabeledTraceSet& set,
                                           const EvalConfig& cfg,
                                           std::vector<std::string>* sequence_ids);

// Grouped, activity-stratified k-fold cross validation for one location;
// returns F1 per activity (sorted labels) averaged over folds.
std::vector<double> EvaluateLocation(const LabeledTraceSet& set,
                                     const std::vector<std::string>& activities,
                                     const EvalConfig& cfg);

// Rows follow `patches` order; columns are the sorted union of activities.
// Throws kDegenerateLabels for fewer than 2 activities and
// kInsufficientData naming the patch/activity when data is missing.
UtilityMatrix ComputeUtilityMatrix(const std::map<int, LabeledTraceSet>& data,
                                   const PatchSet& patches,
                                   const EvalConfig& cfg, int jobs = 1);

struct LocationRanking {
  // Location ids by descending score, ties lowest id first.
  std::vector<int> order;
  // Average rank (1 = best) per matrix row.
  std::vector<double> ranks;
};

LocationRanking RankLocations(const UtilityMatrix& matrix,
                              const std::string& activity);

// Tie-aware average ranks of `values` in ascending order (1-based).
std::vector<double> AverageRanks(std::span<const double> values);

// Pearson correlation of the average ranks of a and b.
double Spearman(std::span<const double> a, std::span<const double> b);

}  // namespace imuplace

#endif  // IMUPLACE_UTILITY_HPP_
