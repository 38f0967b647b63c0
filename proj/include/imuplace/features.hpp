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

#ifndef IMUPLACE_FEATURES_HPP_
#define IMUPLACE_FEATURES_HPP_

#include <span>
#include <string>
#include <vector>

#include "imuplace/kinematics.hpp"

namespace imuplace {

using Window = std::span<const ImuSample>;

// Fixed-length windows of round(window_s * rate) samples with stride
// round(length * (1 - overlap_frac)) (at least 1). Windows running past the
// end are dropped, so a short trace yields no windows.
std::vector<Window> WindowTrace(const ImuTrace& trace, double window_s,
                                double overlap_frac);

struct FeatureConfig {
  // Upper edge of the band for the spectral energy statistic.
  double spectral_cutoff_hz = 3.0;
};

// Per channel (ax, ay, az, gx, gy, gz), 8 statistics:
//   mean, std, min, max, rms, mean |first difference|, skewness,
//   band energy in [0, spectral_cutoff_hz]
// followed by Pearson correlations (xy, yz, xz) for accel then gyro.
inline constexpr int kStatsPerChannel = 8;
inline constexpr int kFeatureLength = 6 * kStatsPerChannel + 2 * 3;

struct FeatureVector {
  std::vector<double> values;
  double window_start = 0.0;
  std::string activity;
};

FeatureVector ExtractFeatures(Window window, double rate,
                              const FeatureConfig& cfg = {});

}  // namespace imuplace

#endif  // IMUPLACE_FEATURES_HPP_
