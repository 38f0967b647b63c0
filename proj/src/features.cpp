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

#include "imuplace/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace imuplace {
namespace {

constexpr double kTinyStd = 1e-12;

struct ChannelStats {
  double mean = 0.0;
  double std = 0.0;
};

ChannelStats MeanStd(std::span<const double> x) {
  ChannelStats s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(x.size()));
  return s;
}

double Correlation(std::span<const double> a, std::span<const double> b) {
  const ChannelStats sa = MeanStd(a);
  const ChannelStats sb = MeanStd(b);
  if (sa.std < kTinyStd || sb.std < kTinyStd) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - sa.mean) * (b[i] - sb.mean);
  }
  cov /= static_cast<double>(a.size());
  return std::clamp(cov / (sa.std * sb.std), -1.0, 1.0);
}

// One-sided mean power in DFT bins with frequency <= cutoff. Summed over
// all bins this equals mean(x^2).
double BandEnergy(std::span<const double> x, double rate, double cutoff) {
  const std::size_t n = x.size();
  const auto max_bin = std::min<std::size_t>(
      n / 2, static_cast<std::size_t>(std::floor(cutoff * n / rate)));
  double energy = 0.0;
  for (std::size_t k = 0; k <= max_bin; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -2.0 * std::numbers::pi *
                           static_cast<double>(k * i % n) /
                           static_cast<double>(n);
      re += x[i] * std::cos(phase);
      im += x[i] * std::sin(phase);
    }
    const bool single = (k == 0) || (2 * k == n);
    energy += (single ? 1.0 : 2.0) * (re * re + im * im);
  }
  return energy / static_cast<double>(n * n);
}

}  // namespace

std::vector<Window> WindowTrace(const ImuTrace& trace, double window_s,
                                double overlap_frac) {
  std::vector<Window> windows;
  if (!(window_s > 0.0) || !(overlap_frac >= 0.0) || !(overlap_frac < 1.0)) {
    return windows;
  }
  const auto length = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(window_s * trace.rate)));
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(static_cast<double>(length) * (1.0 - overlap_frac))));
  const std::span<const ImuSample> all(trace.samples);
  for (std::size_t start = 0; start + length <= all.size(); start += stride) {
    windows.push_back(all.subspan(start, length));
  }
  return windows;
}

FeatureVector ExtractFeatures(Window window, double rate,
                              const FeatureConfig& cfg) {
  FeatureVector fv;
  fv.values.reserve(kFeatureLength);
  if (window.empty()) {
    fv.values.assign(kFeatureLength, 0.0);
    return fv;
  }
  fv.window_start = window.front().t;

  const std::size_t n = window.size();
  std::array<std::vector<double>, 6> channels;
  for (int c = 0; c < 6; ++c) {
    channels[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      channels[c][i] = c < 3 ? window[i].accel[c] : window[i].gyro[c - 3];
    }
  }

  for (const auto& x : channels) {
    const ChannelStats s = MeanStd(x);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double sq = 0.0;
    double cube = 0.0;
    for (double v : x) {
      sq += v * v;
      cube += (v - s.mean) * (v - s.mean) * (v - s.mean);
    }
    double diff = 0.0;
    for (std::size_t i = 1; i < n; ++i) diff += std::abs(x[i] - x[i - 1]);

    fv.values.push_back(s.mean);
    fv.values.push_back(s.std);
    fv.values.push_back(*lo);
    fv.values.push_back(*hi);
    fv.values.push_back(std::sqrt(sq / static_cast<double>(n)));
    fv.values.push_back(n > 1 ? diff / static_cast<double>(n - 1) : 0.0);
    fv.values.push_back(s.std < kTinyStd ? 0.0
                                         : (cube / static_cast<double>(n)) /
                                               (s.std * s.std * s.std));
    fv.values.push_back(BandEnergy(x, rate, cfg.spectral_cutoff_hz));
  }
  for (int sensor = 0; sensor < 2; ++sensor) {
    const auto& x = channels[3 * sensor];
    const auto& y = channels[3 * sensor + 1];
    const auto& z = channels[3 * sensor + 2];
    fv.values.push_back(Correlation(x, y));
    fv.values.push_back(Correlation(y, z));
    fv.values.push_back(Correlation(x, z));
  }
  return fv;
}

}  // namespace imuplace
