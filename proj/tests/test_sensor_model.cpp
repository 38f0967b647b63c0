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

#include <cmath>
#include <complex>
#include <numeric>
#include <set>

#include "doctest.h"
#include "imuplace/error.hpp"
#include "imuplace/kinematics.hpp"
#include "imuplace/sensor_model.hpp"
#include "support.hpp"

using namespace imuplace;
using namespace imuplace::testing;

namespace {

template <class F>
ImuTrace MakeTrace(std::size_t n, double rate, F value, int patch_id = 0) {
  ImuTrace tr;
  tr.patch_id = patch_id;
  tr.rate = rate;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    const double x = value(k, t);
    tr.samples.push_back({t, Vec3(x, 2.0 * x, -x), Vec3(0.5 * x, x, 3.0 * x)});
  }
  return tr;
}

ImuTrace Zeros(std::size_t n, double rate, int patch_id = 0) {
  return MakeTrace(n, rate, [](std::size_t, double) { return 0.0; }, patch_id);
}

SensorConfig Silent(double rate) { return SensorConfig::Ideal(rate); }

double Std(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double v = 0.0;
  for (double a : x) v += (a - m) * (a - m);
  return std::sqrt(v / (x.size() - 1));
}

}  // namespace

TEST_CASE("butterworth design matches the analog prototype") {
  const double rate = 200.0, fc = 15.0;
  for (int order : {1, 2, 3, 4, 6}) {
    const auto sections = DesignButterworthLowpass(fc, rate, order);
    for (double f : {0.0, 5.0, 15.0, 30.0, 60.0, 99.0}) {
      const std::complex<double> z = std::polar(1.0, -2.0 * M_PI * f / rate);
      std::complex<double> h = 1.0;
      for (const Biquad& q : sections) {
        h *= (q.b0 + q.b1 * z + q.b2 * z * z) / (1.0 + q.a1 * z + q.a2 * z * z);
      }
      // Bilinear transform with prewarping maps the cutoff exactly.
      const double ratio = std::tan(M_PI * f / rate) / std::tan(M_PI * fc / rate);
      const double expected = 1.0 / std::sqrt(1.0 + std::pow(ratio, 2 * order));
      CHECK(std::abs(h) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("lowpass keeps DC") {
  const auto dc = MakeTrace(300, 100.0, [](std::size_t, double) { return 1.7; });
  const auto out = LowpassFilter(dc, 10.0, 2);
  REQUIRE(out.size() == dc.size());
  for (std::size_t k = 0; k < dc.size(); ++k) {
    CHECK(out.samples[k].t == dc.samples[k].t);
    CHECK((out.samples[k].accel - dc.samples[k].accel).norm() < 1e-9);
    CHECK((out.samples[k].gyro - dc.samples[k].gyro).norm() < 1e-9);
  }
}

TEST_CASE("lowpass removes Nyquist") {
  const double rate = 80.0;
  const auto alt = MakeTrace(400, rate, [](std::size_t k, double) { return k % 2 ? -1.0 : 1.0; });
  const auto out = LowpassFilter(alt, rate / 8.0, 2);
  double peak = 0.0;
  for (std::size_t k = 20; k + 20 < out.size(); ++k) {
    peak = std::max(peak, std::abs(out.samples[k].accel.x()));
  }
  // |H(Nyquist)| is exactly 0 after the bilinear transform; only the padded
  // edges keep a transient.
  CHECK(peak < 1e-4);
  // scipy.signal.filtfilt(b, a, x, padtype="odd", padlen=6) with
  // butter(2, 10 / 40) gives these edge values.
  CHECK(out.samples[0].accel.x() == doctest::Approx(1.0157750342935528).epsilon(1e-9));
  CHECK(out.samples[1].accel.x() == doctest::Approx(0.4756077161067268).epsilon(1e-9));
}

TEST_CASE("forward-backward filtering halves a sine at the cutoff") {
  const double rate = 100.0, fc = 5.0;
  const auto sine = MakeTrace(2000, rate, [&](std::size_t, double t) { return std::sin(2 * M_PI * fc * t); });
  const auto out = LowpassFilter(sine, fc, 2);
  double peak = 0.0;
  for (std::size_t k = 500; k < 1500; ++k) peak = std::max(peak, std::abs(out.samples[k].accel.x()));
  CHECK(peak == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("forward-backward filtering has zero delay") {
  const auto impulse = MakeTrace(201, 100.0, [](std::size_t k, double) { return k == 100 ? 1.0 : 0.0; });
  const auto out = LowpassFilter(impulse, 8.0, 3);
  std::size_t arg = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out.samples[k].accel.x() > out.samples[arg].accel.x()) arg = k;
  }
  CHECK(arg == 100);
}

TEST_CASE("lowpass errors") {
  const auto tr = Zeros(50, 100.0);
  CHECK_THROWS_AS(LowpassFilter(tr, 50.0, 2), Error);
  try {
    LowpassFilter(tr, 60.0, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadCutoff);
  }
  try {
    LowpassFilter(ImuTrace{0, 100.0, {}}, 10.0, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTrace);
  }
}

TEST_CASE("resample") {
  const auto tr = MakeTrace(101, 100.0, [](std::size_t, double t) { return 3.0 * t - 1.0; });
  const auto same = Resample(tr, 100.0);
  REQUIRE(same.size() == tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(std::abs(same.samples[k].accel.x() - tr.samples[k].accel.x()) < 1e-12);
  }

  const auto up = Resample(tr, 200.0);
  CHECK(up.size() == 201);
  CHECK(up.rate == 200.0);
  for (const auto& s : up.samples) {
    CHECK(s.accel.x() == doctest::Approx(3.0 * s.t - 1.0).epsilon(1e-12));
    CHECK(s.gyro.z() == doctest::Approx(3.0 * (3.0 * s.t - 1.0)).epsilon(1e-12));
  }
  const auto down = Resample(tr, 30.0);
  CHECK(down.size() == 31);
  for (std::size_t k = 1; k < down.size(); ++k) {
    CHECK(down.samples[k].t - down.samples[k - 1].t == doctest::Approx(1.0 / 30.0));
  }

  try {
    Resample(Zeros(1, 100.0), 50.0);
    FAIL("expected EmptyTrace");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTrace);
  }
}

TEST_CASE("silent sensor is the identity") {
  const auto tr = MakeTrace(120, 60.0, [](std::size_t, double t) { return std::sin(3 * t); });
  const auto out = AddNoise(tr, Silent(60.0));
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(out.samples[k].accel == tr.samples[k].accel);
    CHECK(out.samples[k].gyro == tr.samples[k].gyro);
  }
  const auto full = ApplySensorModel(tr, Silent(60.0));
  REQUIRE(full.size() == tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK((full.samples[k].accel - tr.samples[k].accel).norm() < 1e-9);
  }
}

TEST_CASE("white noise level, whiteness and determinism") {
  SensorConfig cfg = Silent(50.0);
  cfg.accel_noise_std = 0.05;
  cfg.gyro_noise_std = 0.01;
  cfg.rng_seed = 123;
  const auto out = AddNoise(Zeros(100000, 50.0, 4), cfg);
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> a, g;
    for (const auto& s : out.samples) {
      a.push_back(s.accel[axis]);
      g.push_back(s.gyro[axis]);
    }
    CHECK(std::abs(Std(a) / 0.05 - 1.0) < 0.05);
    CHECK(std::abs(Std(g) / 0.01 - 1.0) < 0.05);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      den += a[k] * a[k];
      if (k > 0) num += a[k] * a[k - 1];
    }
    CHECK(std::abs(num / den) < 0.05);
  }
  const auto again = AddNoise(Zeros(100000, 50.0, 4), cfg);
  CHECK(again.samples.back().accel == out.samples.back().accel);
  const auto other = AddNoise(Zeros(100, 50.0, 5), cfg);
  CHECK(other.samples[0].accel != out.samples[0].accel);
}

TEST_CASE("noise streams are independent per channel") {
  // Switching gyro noise on must not change the accel noise draws.
  SensorConfig a = Silent(50.0);
  a.accel_noise_std = 0.1;
  a.rng_seed = 8;
  SensorConfig b = a;
  b.gyro_noise_std = 0.2;
  b.gyro_bias_walk_std = 0.01;
  const auto x = AddNoise(Zeros(500, 50.0), a);
  const auto y = AddNoise(Zeros(500, 50.0), b);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(x.samples[k].accel == y.samples[k].accel);
}

TEST_CASE("bias walk variance grows linearly") {
  SensorConfig cfg = Silent(50.0);
  cfg.accel_bias_walk_std = 0.02;
  const std::size_t n = 100;
  std::vector<double> sum(n, 0.0), sq(n, 0.0);
  const int runs = 400;
  for (int seed = 0; seed < runs; ++seed) {
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const auto out = AddNoise(Zeros(n, 50.0), cfg);
    for (std::size_t k = 0; k < n; ++k) {
      sum[k] += out.samples[k].accel.x();
      sq[k] += out.samples[k].accel.x() * out.samples[k].accel.x();
    }
  }
  CHECK(sq[0] == 0.0);
  // Var(b_k) = k dt walk^2; compare at the end of the trace.
  const double var_end = sq[n - 1] / runs - std::pow(sum[n - 1] / runs, 2);
  const double expected = (n - 1) / 50.0 * 0.02 * 0.02;
  CHECK(var_end == doctest::Approx(expected).epsilon(0.25));
}

TEST_CASE("misalignment preserves norms") {
  SensorConfig cfg = Silent(40.0);
  cfg.misalignment = RandomMisalignment(5.0, 3);
  const Vec3 axis_angle = RotationLog(cfg.misalignment);
  CHECK(axis_angle.norm() == doctest::Approx(5.0 * M_PI / 180.0).epsilon(1e-12));
  const auto tr = MakeTrace(100, 40.0, [](std::size_t k, double) { return std::cos(0.1 * k); });
  const auto out = AddNoise(tr, cfg);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(std::abs(out.samples[k].accel.norm() - tr.samples[k].accel.norm()) < 1e-9);
    CHECK(std::abs(out.samples[k].gyro.norm() - tr.samples[k].gyro.norm()) < 1e-9);
  }
}

TEST_CASE("full model on a static pose is unbiased") {
  const Mat3 r = Rx(0.4) * Rz(1.1);
  const Vec3 g_local = r.transpose() * Vec3(0, -9.81, 0);
  ImuTrace tr;
  tr.rate = 100.0;
  for (int k = 0; k < 4000; ++k) tr.samples.push_back({k / 100.0, g_local, Vec3::Zero()});
  SensorConfig cfg;  // filter, resample and white noise; no drift, no tilt
  cfg.accel_bias_walk_std = 0.0;
  cfg.gyro_bias_walk_std = 0.0;
  cfg.rng_seed = 5;
  const auto out = ApplySensorModel(tr, cfg);
  CHECK(out.rate == 50.0);
  Vec3 mean = Vec3::Zero();
  for (const auto& s : out.samples) mean += s.accel;
  mean /= static_cast<double>(out.size());
  const double band = 3.0 * cfg.accel_noise_std / std::sqrt(static_cast<double>(out.size()));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - g_local[i]) < band);

  const auto again = ApplySensorModel(tr, cfg);
  for (std::size_t k = 0; k < out.size(); ++k) CHECK(again.samples[k].accel == out.samples[k].accel);
}

TEST_CASE("sensor config validation") {
  SensorConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.filter_cutoff = 30.0;  // above output Nyquist
  try {
    cfg.Validate();
    FAIL("expected BadCutoff");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadCutoff);
  }
  cfg = SensorConfig{};
  cfg.accel_noise_std = -1.0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = SensorConfig{};
  cfg.misalignment(0, 0) = 2.0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
}

TEST_CASE("stream seeds differ by patch and channel") {
  std::set<std::uint64_t> seen;
  for (int patch = 0; patch < 50; ++patch) {
    for (auto ch : {NoiseChannel::kAccelNoise, NoiseChannel::kAccelBias,
                    NoiseChannel::kGyroNoise, NoiseChannel::kGyroBias}) {
      seen.insert(DeriveStreamSeed(1, patch, ch));
    }
  }
  CHECK(seen.size() == 200);
}
