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

#include "imuplace/sensor_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/LU>

#include "imuplace/error.hpp"

namespace imuplace {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Six scalar channels of a trace, in ax, ay, az, gx, gy, gz order.
std::array<std::vector<double>, 6> SplitChannels(const ImuTrace& trace) {
  std::array<std::vector<double>, 6> ch;
  for (auto& c : ch) c.resize(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const ImuSample& s = trace.samples[k];
    for (int i = 0; i < 3; ++i) {
      ch[i][k] = s.accel[i];
      ch[3 + i][k] = s.gyro[i];
    }
  }
  return ch;
}

void CheckCutoff(double cutoff, double rate) {
  if (!(cutoff > 0.0) || !(cutoff < 0.5 * rate)) {
    throw Error(ErrorCode::kBadCutoff,
                "cutoff " + std::to_string(cutoff) + " Hz not in (0, " +
                    std::to_string(0.5 * rate) + ")");
  }
}

void CheckOrder(int order) {
  if (order < 1 || order > 8) {
    throw Error(ErrorCode::kInvalidInput,
                "filter order " + std::to_string(order) + " not in 1..8");
  }
}

bool IsRotation(const Mat3& m, double tol) {
  return m.allFinite() &&
         (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

std::vector<double> RunSections(std::span<const Biquad> sections,
                                std::vector<double> x) {
  if (x.empty()) return x;
  double level = x.front();
  for (const Biquad& q : sections) {
    const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double y0 = gain * level;
    double s2 = q.b2 * level - q.a2 * y0;
    double s1 = q.b1 * level - q.a1 * y0 + s2;
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    level = y0;
  }
  return x;
}

}  // namespace

void SensorConfig::Validate() const {
  if (!(output_rate > 0.0) || !std::isfinite(output_rate)) {
    throw Error(ErrorCode::kInvalidInput, "output_rate must be positive");
  }
  if (filter_cutoff) {
    CheckCutoff(*filter_cutoff, output_rate);
    CheckOrder(filter_order);
  }
  for (double s : {accel_noise_std, gyro_noise_std, accel_bias_walk_std,
                   gyro_bias_walk_std}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidInput,
                  "noise standard deviations must be finite and >= 0");
    }
  }
  if (!IsRotation(misalignment, 1e-9)) {
    throw Error(ErrorCode::kInvalidInput, "misalignment is not a rotation");
  }
}

SensorConfig SensorConfig::Ideal(double rate) {
  SensorConfig cfg;
  cfg.output_rate = rate;
  cfg.filter_cutoff.reset();
  cfg.accel_noise_std = 0.0;
  cfg.gyro_noise_std = 0.0;
  cfg.accel_bias_walk_std = 0.0;
  cfg.gyro_bias_walk_std = 0.0;
  return cfg;
}

Mat3 RandomMisalignment(double degrees, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(normal(rng), normal(rng), normal(rng));
  } while (axis.norm() < 1e-6);
  return RotationExp(axis.normalized() * degrees * std::numbers::pi / 180.0);
}

std::uint64_t DeriveStreamSeed(std::uint64_t seed, int patch_id,
                               NoiseChannel channel) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(
                         patch_id)));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(channel));
  return h;
}

std::vector<Biquad> DesignButterworthLowpass(double cutoff, double rate,
                                             int order) {
  CheckCutoff(cutoff, rate);
  CheckOrder(order);
  const double k = std::tan(std::numbers::pi * cutoff / rate);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    // s^2 + a s + 1 for the i-th conjugate pole pair.
    const double a =
        2.0 * std::sin(std::numbers::pi * (2 * i + 1) / (2.0 * order));
    const double norm = 1.0 / (1.0 + a * k + k2);
    Biquad q;
    q.b0 = k2 * norm;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * (k2 - 1.0) * norm;
    q.a2 = (1.0 - a * k + k2) * norm;
    sections.push_back(q);
  }
  if (order % 2 == 1) {
    Biquad q;
    q.b0 = k / (1.0 + k);
    q.b1 = q.b0;
    q.b2 = 0.0;
    q.a1 = (k - 1.0) / (k + 1.0);
    q.a2 = 0.0;
    sections.push_back(q);
  }
  return sections;
}

std::vector<double> FiltFilt(std::span<const Biquad> sections,
                             std::span<const double> x, int order) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t pad =
      std::min<std::size_t>(static_cast<std::size_t>(3 * order), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) {
    ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  }

  ext = RunSections(sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());
  ext = RunSections(sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

ImuTrace LowpassFilter(const ImuTrace& trace, double cutoff, int order) {
  if (trace.empty()) {
    throw Error(ErrorCode::kEmptyTrace,
                "patch " + std::to_string(trace.patch_id));
  }
  const std::vector<Biquad> sections =
      DesignButterworthLowpass(cutoff, trace.rate, order);
  const auto channels = SplitChannels(trace);

  ImuTrace out = trace;
  for (int c = 0; c < 6; ++c) {
    const std::vector<double> y = FiltFilt(sections, channels[c], order);
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (c < 3) {
        out.samples[k].accel[c] = y[k];
      } else {
        out.samples[k].gyro[c - 3] = y[k];
      }
    }
  }
  return out;
}

ImuTrace Resample(const ImuTrace& trace, double target_rate) {
  if (!(target_rate > 0.0) || !std::isfinite(target_rate)) {
    throw Error(ErrorCode::kInvalidInput, "target rate must be positive");
  }
  if (trace.size() < 2) {
    throw Error(ErrorCode::kEmptyTrace,
                "resampling needs at least 2 samples, patch " +
                    std::to_string(trace.patch_id));
  }
  const double t0 = trace.samples.front().t;
  const double span = trace.samples.back().t - t0;
  const auto count =
      static_cast<std::size_t>(std::floor(span * target_rate + 1e-9)) + 1;

  ImuTrace out;
  out.patch_id = trace.patch_id;
  out.rate = target_rate;
  out.samples.reserve(count);
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) / target_rate;
    while (j + 2 < trace.size() && trace.samples[j + 1].t <= t) ++j;
    const ImuSample& a = trace.samples[j];
    const ImuSample& b = trace.samples[j + 1];
    double w = (t - a.t) / (b.t - a.t);
    w = std::clamp(w, 0.0, 1.0);
    ImuSample s;
    s.t = t;
    s.accel = a.accel + w * (b.accel - a.accel);
    s.gyro = a.gyro + w * (b.gyro - a.gyro);
    out.samples.push_back(s);
  }
  return out;
}

ImuTrace AddNoise(const ImuTrace& trace, const SensorConfig& cfg) {
  if (trace.empty()) {
    throw Error(ErrorCode::kEmptyTrace,
                "patch " + std::to_string(trace.patch_id));
  }
  const double dt = 1.0 / trace.rate;
  const bool rotate = cfg.misalignment != Mat3::Identity();

  // One distribution per stream: normal_distribution caches a spare value,
  // so sharing it would leak draws between channels.
  struct Stream {
    std::mt19937_64 rng;
    double std;
    std::normal_distribution<double> normal{0.0, 1.0};
  };
  auto make = [&](NoiseChannel ch, double std) {
    return Stream{std::mt19937_64(DeriveStreamSeed(cfg.rng_seed,
                                                   trace.patch_id, ch)),
                  std, {}};
  };
  Stream accel_noise = make(NoiseChannel::kAccelNoise, cfg.accel_noise_std);
  Stream gyro_noise = make(NoiseChannel::kGyroNoise, cfg.gyro_noise_std);
  Stream accel_bias =
      make(NoiseChannel::kAccelBias, cfg.accel_bias_walk_std * std::sqrt(dt));
  Stream gyro_bias =
      make(NoiseChannel::kGyroBias, cfg.gyro_bias_walk_std * std::sqrt(dt));

  auto draw = [](Stream& s) {
    if (s.std == 0.0) return Vec3::Zero().eval();
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = s.std * s.normal(s.rng);
    return v;
  };

  ImuTrace out = trace;
  Vec3 b_accel = Vec3::Zero();
  Vec3 b_gyro = Vec3::Zero();
  for (std::size_t k = 0; k < out.size(); ++k) {
    ImuSample& s = out.samples[k];
    if (k > 0) {
      b_accel += draw(accel_bias);
      b_gyro += draw(gyro_bias);
    }
    if (rotate) {
      s.accel = cfg.misalignment * s.accel;
      s.gyro = cfg.misalignment * s.gyro;
    }
    s.accel += b_accel + draw(accel_noise);
    s.gyro += b_gyro + draw(gyro_noise);
  }
  return out;
}

ImuTrace ApplySensorModel(const ImuTrace& trace, const SensorConfig& cfg) {
  cfg.Validate();
  if (trace.empty()) {
    throw Error(ErrorCode::kEmptyTrace,
                "patch " + std::to_string(trace.patch_id));
  }
  ImuTrace current = trace;
  if (cfg.filter_cutoff) {
    current = LowpassFilter(current, *cfg.filter_cutoff, cfg.filter_order);
  }
  if (std::abs(cfg.output_rate - current.rate) > 1e-12) {
    current = Resample(current, cfg.output_rate);
  }
  return AddNoise(current, cfg);
}

}  // namespace imuplace
