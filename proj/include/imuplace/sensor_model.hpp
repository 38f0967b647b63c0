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

#ifndef IMUPLACE_SENSOR_MODEL_HPP_
#define IMUPLACE_SENSOR_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imuplace/kinematics.hpp"

namespace imuplace {

// Degradation applied to clean synthetic traces. Defaults follow typical
// consumer MEMS datasheets.
struct SensorConfig {
  double output_rate = 50.0;              // Hz
  std::optional<double> filter_cutoff = 10.0;  // Hz; nullopt disables
  int filter_order = 2;
  double accel_noise_std = 0.05;          // m/s^2
  double gyro_noise_std = 0.01;           // rad/s
  double accel_bias_walk_std = 0.002;     // m/s^2 per sqrt(s)
  double gyro_bias_walk_std = 0.0005;     // rad/s per sqrt(s)
  Mat3 misalignment = Mat3::Identity();
  std::uint64_t rng_seed = 0;

  // Throws kInvalidInput / kBadCutoff on violated invariants.
  void Validate() const;

  // No filtering, no noise, identity misalignment.
  static SensorConfig Ideal(double rate);
};

// Rotation by `degrees` about an axis drawn uniformly from the sphere
// using `seed`.
Mat3 RandomMisalignment(double degrees, std::uint64_t seed);

// Second-order sections of a digital Butterworth low-pass (bilinear
// transform with prewarping). Odd orders end with a first-order section
// stored with b2 = a2 = 0.
struct Biquad {
  double b0, b1, b2, a1, a2;
};
std::vector<Biquad> DesignButterworthLowpass(double cutoff, double rate,
                                             int order);

// Zero-phase forward-backward filtering of one channel. The signal is
// padded by odd reflection of 3 * order samples at both ends and each
// section starts from its steady state for the first padded value.
std::vector<double> FiltFilt(std::span<const Biquad> sections,
                             std::span<const double> x, int order);

ImuTrace LowpassFilter(const ImuTrace& trace, double cutoff, int order);

// Linear interpolation onto t0 + k / target_rate, k = 0..floor(span*rate).
ImuTrace Resample(const ImuTrace& trace, double target_rate);

// out_k = M * clean_k + b_k + eta_k for each of accel and gyro.
ImuTrace AddNoise(const ImuTrace& trace, const SensorConfig& cfg);

// LowpassFilter (source rate) -> Resample (output_rate) -> AddNoise.
ImuTrace ApplySensorModel(const ImuTrace& trace, const SensorConfig& cfg);

// Independent generator stream for (seed, patch, channel).
enum class NoiseChannel : std::uint32_t {
  kAccelNoise = 0,
  kAccelBias = 1,
  kGyroNoise = 2,
  kGyroBias = 3,
};
std::uint64_t DeriveStreamSeed(std::uint64_t seed, int patch_id,
                               NoiseChannel channel);

}  // namespace imuplace

#endif  // IMUPLACE_SENSOR_MODEL_HPP_
