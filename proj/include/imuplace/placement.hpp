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

#ifndef IMUPLACE_PLACEMENT_HPP_
#define IMUPLACE_PLACEMENT_HPP_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "imuplace/utility.hpp"

namespace imuplace {

struct SelectionRequest {
  double tau = 0.9;
  std::set<int> excluded;
  std::optional<int> max_sensors;

  void Validate(const UtilityMatrix& matrix) const;
};

struct ActivityBest {
  std::string activity;
  std::optional<int> location;  // empty when nothing is selected
  double f1 = 0.0;
  bool operator==(const ActivityBest&) const = default;
};

struct SelectionResult {
  std::vector<int> selected;  // pick order
  double coverage = 0.0;
  std::vector<ActivityBest> per_activity_best;
  bool feasible = false;
  double tau = 0.0;

  bool operator==(const SelectionResult&) const = default;
};

struct SingleLocation {
  int location = 0;
  double mean_f1 = 0.0;
};

// argmax of row means over non-excluded rows; ties lowest id.
SingleLocation BestSingleLocation(const UtilityMatrix& matrix,
                                  const std::set<int>& excluded = {});

// Mean over activities of the best F1 within `subset`; 0 for an empty set.
double CoverageScore(const UtilityMatrix& matrix, std::span<const int> subset);

// Assembles a result for `selected`, recomputing coverage and per-activity
// bests from the matrix.
SelectionResult MakeSelectionResult(const UtilityMatrix& matrix,
                                    std::vector<int> selected, double tau,
                                    bool feasible);

// Greedy max-coverage selection until coverage >= tau. Stops as infeasible
// when no candidate improves coverage, candidates run out, or max_sensors
// is reached.
SelectionResult GreedySelect(const UtilityMatrix& matrix,
                             const SelectionRequest& request);

inline constexpr std::size_t kExhaustiveLimit = 20;

// Smallest subset reaching tau, ties by lexicographically smallest ids.
// Limited to kExhaustiveLimit candidate locations (kTooManyLocations).
SelectionResult ExhaustiveSelect(const UtilityMatrix& matrix,
                                 const SelectionRequest& request);

}  // namespace imuplace

#endif  // IMUPLACE_PLACEMENT_HPP_
