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

#include "imuplace/placement.hpp"

#include <algorithm>
#include <string>

#include "imuplace/error.hpp"

namespace imuplace {
namespace {

std::vector<std::size_t> RowsOf(const UtilityMatrix& matrix,
                                std::span<const int> subset) {
  std::vector<std::size_t> rows;
  rows.reserve(subset.size());
  for (int id : subset) {
    const auto row = matrix.RowOf(id);
    if (!row) {
      throw Error(ErrorCode::kUnknownLocation, std::to_string(id));
    }
    rows.push_back(*row);
  }
  return rows;
}

// Non-excluded location ids in ascending order.
std::vector<int> Candidates(const UtilityMatrix& matrix,
                            const std::set<int>& excluded) {
  std::vector<int> ids;
  for (int id : matrix.locations()) {
    if (!excluded.contains(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

void SelectionRequest::Validate(const UtilityMatrix& matrix) const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "tau " + std::to_string(tau) + " outside [0, 1]");
  }
  for (int id : excluded) {
    if (!matrix.RowOf(id)) {
      throw Error(ErrorCode::kUnknownLocation,
                  "excluded location " + std::to_string(id));
    }
  }
  if (max_sensors && *max_sensors < 0) {
    throw Error(ErrorCode::kInvalidInput, "max_sensors must be >= 0");
  }
}

SingleLocation BestSingleLocation(const UtilityMatrix& matrix,
                                  const std::set<int>& excluded) {
  std::optional<SingleLocation> best;
  const double t = static_cast<double>(matrix.activity_count());
  for (std::size_t r = 0; r < matrix.location_count(); ++r) {
    const int id = matrix.locations()[r];
    if (excluded.contains(id)) continue;
    double sum = 0.0;
    for (std::size_t c = 0; c < matrix.activity_count(); ++c) {
      sum += matrix.at(r, c);
    }
    const double mean = t > 0.0 ? sum / t : 0.0;
    if (!best || mean > best->mean_f1 ||
        (mean == best->mean_f1 && id < best->location)) {
      best = SingleLocation{id, mean};
    }
  }
  if (!best) {
    throw Error(ErrorCode::kAllExcluded, "no candidate location left");
  }
  return *best;
}

double CoverageScore(const UtilityMatrix& matrix, std::span<const int> subset) {
  const std::vector<std::size_t> rows = RowsOf(matrix, subset);
  if (rows.empty() || matrix.activity_count() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < matrix.activity_count(); ++c) {
    double best = matrix.at(rows.front(), c);
    for (std::size_t r : rows) best = std::max(best, matrix.at(r, c));
    sum += best;
  }
  return sum / static_cast<double>(matrix.activity_count());
}

SelectionResult MakeSelectionResult(const UtilityMatrix& matrix,
                                    std::vector<int> selected, double tau,
                                    bool feasible) {
  SelectionResult result;
  result.tau = tau;
  result.feasible = feasible;
  result.coverage = CoverageScore(matrix, selected);
  const std::vector<std::size_t> rows = RowsOf(matrix, selected);
  for (std::size_t c = 0; c < matrix.activity_count(); ++c) {
    ActivityBest best{matrix.activities()[c], std::nullopt, 0.0};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double f = matrix.at(rows[i], c);
      if (!best.location || f > best.f1 ||
          (f == best.f1 && selected[i] < *best.location)) {
        best.location = selected[i];
        best.f1 = f;
      }
    }
    result.per_activity_best.push_back(best);
  }
  result.selected = std::move(selected);
  return result;
}

SelectionResult GreedySelect(const UtilityMatrix& matrix,
                             const SelectionRequest& request) {
  request.Validate(matrix);
  const std::size_t num_activities = matrix.activity_count();
  std::vector<int> candidates = Candidates(matrix, request.excluded);
  std::vector<double> current(num_activities, 0.0);
  std::vector<int> selected;

  while (CoverageScore(matrix, selected) < request.tau) {
    if (request.max_sensors &&
        static_cast<int>(selected.size()) >= *request.max_sensors) {
      return MakeSelectionResult(matrix, selected, request.tau, false);
    }
    double current_sum = 0.0;
    for (double v : current) current_sum += v;

    std::optional<std::size_t> best_index;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::size_t row = *matrix.RowOf(candidates[i]);
      double with = 0.0;
      for (std::size_t c = 0; c < num_activities; ++c) {
        with += std::max(matrix.at(row, c), current[c]);
      }
      const double gain = with - current_sum;
      if (gain > best_gain) {
        best_gain = gain;
        best_index = i;
      }
    }
    if (!best_index) {
      // No remaining candidate raises coverage: tau is unreachable.
      return MakeSelectionResult(matrix, selected, request.tau, false);
    }
    const int pick = candidates[*best_index];
    const std::size_t row = *matrix.RowOf(pick);
    for (std::size_t c = 0; c < num_activities; ++c) {
      current[c] = std::max(current[c], matrix.at(row, c));
    }
    selected.push_back(pick);
    candidates.erase(candidates.begin() +
                     static_cast<std::ptrdiff_t>(*best_index));
  }
  return MakeSelectionResult(matrix, selected, request.tau, true);
}

SelectionResult ExhaustiveSelect(const UtilityMatrix& matrix,
                                 const SelectionRequest& request) {
  request.Validate(matrix);
  const std::vector<int> candidates = Candidates(matrix, request.excluded);
  const std::size_t m = candidates.size();
  if (m > kExhaustiveLimit) {
    throw Error(ErrorCode::kTooManyLocations,
                std::to_string(m) + " candidates, limit " +
                    std::to_string(kExhaustiveLimit));
  }
  std::size_t max_k = m;
  if (request.max_sensors) {
    max_k = std::min(max_k, static_cast<std::size_t>(*request.max_sensors));
  }

  std::vector<int> best_fallback;
  double best_fallback_coverage = -1.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    // Index combinations of size k in lexicographic order.
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> subset(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) subset[i] = candidates[idx[i]];
      const double coverage = CoverageScore(matrix, subset);
      if (coverage >= request.tau) {
        return MakeSelectionResult(matrix, subset, request.tau, true);
      }
      if (k == max_k && coverage > best_fallback_coverage) {
        best_fallback_coverage = coverage;
        best_fallback = subset;
      }
      // Advance to the next combination.
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return MakeSelectionResult(matrix, best_fallback, request.tau, false);
}

}  // namespace imuplace
