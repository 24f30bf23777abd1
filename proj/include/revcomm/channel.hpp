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

// Frequency-selective MIMO channel synthesis from a planar scattering scene.
//
// Geometry model: every (antenna, user) pair is connected by one
// line-of-sight ray and one single-bounce ray per scatterer. A ray of total
// length d contributes (1/d) * exp(-j 2 pi d f_s / c) on subcarrier s, or
// nothing when any of its segments crosses the obstacle rectangle.
// Subcarriers sit on the grid f_s = f_c - B/2 + (s + 1/2) B / S.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstring>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "revcomm/core.hpp"

namespace revcomm {

using Complex = std::complex<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Liang-Barsky clip: true when the closed segment [a, b] touches the closed
// rectangle.
inline bool segment_hits_rect(Point a, Point b, const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    }
  }
  return t0 <= t1;
}

struct SceneConfig {
  Index num_antennas = 64;
  Index num_users = 12;
  Index num_scatterers = 75;
  Rect area{0.0, 0.0, 200.0, 200.0};
  std::optional<Rect> obstacle = Rect{90.0, 50.0, 110.0, 150.0};
  double carrier_frequency = 2.6e9;
  double bandwidth = 20e6;
  Index num_subcarriers = 300;
};

struct Scene {
  std::vector<Point> antenna_positions;
  std::vector<Point> user_positions;
  std::vector<Point> scatterer_positions;
  std::optional<Rect> obstacle;
  double carrier_frequency = 2.6e9;
  double bandwidth = 20e6;
  Index num_subcarriers = 1;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const Scene&, const Scene&) = default;
};

inline void validate(const Scene& scene) {
  require(!scene.antenna_positions.empty(), "scene: no antennas");
  require(!scene.user_positions.empty(), "scene: no users");
  require(scene.num_subcarriers >= 1, "scene: num_subcarriers must be >= 1");
  require(scene.carrier_frequency > 0.0 && scene.bandwidth >= 0.0,
          "scene: carrier frequency must be positive and bandwidth nonnegative");
  const auto& a = scene.antenna_positions;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      require(!(a[i] == a[j]), "scene: two antennas share coordinates");
}

// Positions are uniform over the configured area with the obstacle carved
// out (rejection sampling), so no transceiver sits inside the blockage.
inline Scene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  require(config.num_antennas >= 1, "generate_scene: zero antennas");
  require(config.num_users >= 1, "generate_scene: zero users");
  require(config.num_scatterers >= 0, "generate_scene: negative scatterer count");
  require(config.num_subcarriers >= 1, "generate_scene: num_subcarriers must be >= 1");
  require(config.area.x_max > config.area.x_min && config.area.y_max > config.area.y_min,
          "generate_scene: degenerate area");
  if (config.obstacle) {
    require(config.obstacle->x_max > config.obstacle->x_min &&
                config.obstacle->y_max > config.obstacle->y_min,
            "generate_scene: degenerate obstacle");
    require(config.obstacle->area() < 0.9 * config.area.area(),
            "generate_scene: obstacle leaves no room for positions");
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> ux(config.area.x_min, config.area.x_max);
  std::uniform_real_distribution<double> uy(config.area.y_min, config.area.y_max);
  auto draw = [&]() {
    for (;;) {
      Point p{ux(rng), uy(rng)};
      if (!config.obstacle || !config.obstacle->contains(p)) return p;
    }
  };

  Scene scene;
  scene.obstacle = config.obstacle;
  scene.carrier_frequency = config.carrier_frequency;
  scene.bandwidth = config.bandwidth;
  scene.num_subcarriers = config.num_subcarriers;
  scene.rng_seed = seed;
  while (static_cast<Index>(scene.antenna_positions.size()) < config.num_antennas) {
    const Point p = draw();
    if (std::find(scene.antenna_positions.begin(), scene.antenna_positions.end(), p) ==
        scene.antenna_positions.end())
      scene.antenna_positions.push_back(p);
  }
  for (Index i = 0; i < config.num_users; ++i) scene.user_positions.push_back(draw());
  for (Index i = 0; i < config.num_scatterers; ++i) scene.scatterer_positions.push_back(draw());
  return scene;
}

inline double subcarrier_frequency(const Scene& scene, Index s) {
  const double spacing = scene.bandwidth / static_cast<double>(scene.num_subcarriers);
  return scene.carrier_frequency - scene.bandwidth / 2.0 + (static_cast<double>(s) + 0.5) * spacing;
}

// Complex gains indexed (antenna t, user r, subcarrier s). Storage is
// subcarrier-major so that each subcarrier is a contiguous row-major
// N_T x N_R matrix.
class ChannelTensor {
 public:
  using SubcarrierMatrix =
      Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  ChannelTensor() = default;
  ChannelTensor(Index n_t, Index n_r, Index n_subcarriers)
      : n_t_(n_t), n_r_(n_r), n_s_(n_subcarriers),
        gains_(checked_size(n_t, n_r, n_subcarriers), Complex{}) {}

  Index n_t() const { return n_t_; }
  Index n_r() const { return n_r_; }
  Index n_subcarriers() const { return n_s_; }
  std::size_t size() const { return gains_.size(); }

  Complex& at(Index t, Index r, Index s) { return gains_[offset(t, r, s)]; }
  const Complex& at(Index t, Index r, Index s) const { return gains_[offset(t, r, s)]; }

  SubcarrierMatrix subcarrier(Index s) const {
    return SubcarrierMatrix(gains_.data() + static_cast<std::size_t>(s * n_t_ * n_r_), n_t_, n_r_);
  }

  std::vector<Complex>& raw() { return gains_; }
  const std::vector<Complex>& raw() const { return gains_; }

  double mean_power() const {
    double sum = 0.0;
    for (const auto& g : gains_) sum += std::norm(g);
    return sum / static_cast<double>(gains_.size());
  }

  bool all_finite() const {
    return std::all_of(gains_.begin(), gains_.end(), [](const Complex& g) {
      return std::isfinite(g.real()) && std::isfinite(g.imag());
    });
  }

  // Bitwise equality, distinguishing -0.0 from 0.0 and comparing NaN payloads.
  bool identical(const ChannelTensor& other) const {
    return n_t_ == other.n_t_ && n_r_ == other.n_r_ && n_s_ == other.n_s_ &&
           std::memcmp(gains_.data(), other.gains_.data(), gains_.size() * sizeof(Complex)) == 0;
  }

 private:
  static std::size_t checked_size(Index n_t, Index n_r, Index n_s) {
    require(n_t >= 1 && n_r >= 1 && n_s >= 1, "ChannelTensor: dimensions must be positive");
    return static_cast<std::size_t>(n_t * n_r * n_s);
  }

  std::size_t offset(Index t, Index r, Index s) const {
    return static_cast<std::size_t>((s * n_t_ + t) * n_r_ + r);
  }

  Index n_t_ = 0;
  Index n_r_ = 0;
  Index n_s_ = 0;
  std::vector<Complex> gains_;
};

inline constexpr double kSpeedOfLight = 299792458.0;

// Lengths of the unblocked rays between antenna t and user r: the
// line-of-sight ray first (when clear), then one single-bounce ray per
// scatterer in scene order.
inline std::vector<double> propagation_paths(const Scene& scene, Index t, Index r) {
  const Point a = scene.antenna_positions.at(static_cast<std::size_t>(t));
  const Point u = scene.user_positions.at(static_cast<std::size_t>(r));
  const double los = distance(a, u);
  require(los > 0.0, "synthesize_channel: antenna coincides with a user");
  auto blocked = [&](Point p, Point q) { return scene.obstacle && segment_hits_rect(p, q, *scene.obstacle); };
  std::vector<double> lengths;
  if (!blocked(a, u)) lengths.push_back(los);
  for (const Point& sc : scene.scatterer_positions) {
    if (blocked(a, sc) || blocked(sc, u)) continue;
    lengths.push_back(distance(a, sc) + distance(sc, u));
  }
  return lengths;
}

// Raw (unnormalized) path sum.
inline ChannelTensor synthesize_raw(const Scene& scene) {
  validate(scene);
  const Index n_t = static_cast<Index>(scene.antenna_positions.size());
  const Index n_r = static_cast<Index>(scene.user_positions.size());
  ChannelTensor h(n_t, n_r, scene.num_subcarriers);

  std::vector<double> wavenumbers(static_cast<std::size_t>(scene.num_subcarriers));
  for (Index s = 0; s < scene.num_subcarriers; ++s)
    wavenumbers[static_cast<std::size_t>(s)] = 2.0 * std::numbers::pi * subcarrier_frequency(scene, s) / kSpeedOfLight;

  for (Index t = 0; t < n_t; ++t)
    for (Index r = 0; r < n_r; ++r) {
      const std::vector<double> lengths = propagation_paths(scene, t, r);
      for (Index s = 0; s < scene.num_subcarriers; ++s) {
        const double k = wavenumbers[static_cast<std::size_t>(s)];
        Complex sum{};
        for (double d : lengths) sum += std::polar(1.0 / d, -k * d);
        h.at(t, r, s) = sum;
      }
    }
  return h;
}

// Scales to unit mean |gain|^2 over all (antenna, user, subcarrier).
inline ChannelTensor normalize(const ChannelTensor& raw) {
  require(raw.size() > 0, "normalize: empty tensor");
  require(raw.all_finite(), "normalize: non-finite entries");
  const double power = raw.mean_power();
  require(power > 0.0, "normalize: all-zero tensor");
  const double scale = 1.0 / std::sqrt(power);
  ChannelTensor out = raw;
  for (auto& g : out.raw()) g *= scale;
  return out;
}

inline ChannelTensor synthesize_channel(const Scene& scene) {
  ChannelTensor raw = synthesize_raw(scene);
  if (raw.mean_power() == 0.0)
    throw InvalidInput("synthesize_channel: degenerate scene, every ray is blocked");
  return normalize(raw);
}

// Adds i.i.d. circularly-symmetric complex Gaussian noise CN(0, variance).
inline ChannelTensor perturb_csi(const ChannelTensor& h, double error_variance, std::uint64_t seed) {
  require(error_variance >= 0.0 && std::isfinite(error_variance),
          "perturb_csi: error variance must be a finite nonnegative number");
  if (error_variance == 0.0) return h;
  ChannelTensor out = h;
  Rng rng(seed);
  std::normal_distribution<double> component(0.0, std::sqrt(error_variance / 2.0));
  for (auto& g : out.raw()) {
    const double re = component(rng);
    const double im = component(rng);
    g += Complex(re, im);
  }
  return out;
}

struct SubcarrierSubset {
  std::vector<Index> indices;  // sorted, distinct
  ChannelTensor tensor;
};

inline SubcarrierSubset subsample_subcarriers_with_indices(const ChannelTensor& h, Index count,
                                                           std::uint64_t seed) {
  require(count >= 1 && count <= h.n_subcarriers(),
          "subsample_subcarriers: count must lie in [1, number of subcarriers]");
  SubcarrierSubset out{random_subset(h.n_subcarriers(), count, seed),
                       ChannelTensor(h.n_t(), h.n_r(), count)};
  for (Index i = 0; i < count; ++i) {
    const Index s = out.indices[static_cast<std::size_t>(i)];
    for (Index t = 0; t < h.n_t(); ++t)
      for (Index r = 0; r < h.n_r(); ++r) out.tensor.at(t, r, i) = h.at(t, r, s);
  }
  return out;
}

inline ChannelTensor subsample_subcarriers(const ChannelTensor& h, Index count, std::uint64_t seed) {
  return subsample_subcarriers_with_indices(h, count, seed).tensor;
}

}  // namespace revcomm
