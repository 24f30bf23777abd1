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

// Six-velocity FHP lattice gas on a periodic hexagonal grid.
//
// Cells use "odd-r" offset coordinates: odd rows sit half a cell to the
// right. Direction d points at angle 60 * d degrees (0 = east, 1 = north-east,
// counterclockwise). Each cell stores one bit per direction.
//
// One step is collision then propagation:
//   * head-on pair {d, d+3}: rotated by -60 degrees on even parity and +60 on
//     odd parity, which makes the rule deterministic and invertible;
//   * symmetric triple {0,2,4} <-> {1,3,5};
//   * everything else passes through;
//   * propagation moves each particle one cell along its direction; a
//     particle whose target is an obstacle stays put and reverses.
// step_reverse undoes a step bit-exactly as long as no stream cell injects
// particles.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include "revcomm/core.hpp"

namespace revcomm::lattice {

inline constexpr int kDirections = 6;
inline constexpr std::uint8_t kAllDirections = 0x3f;

// Direction vectors in the integer basis (2 * x, 2 * y / sqrt(3)); exact
// for momentum bookkeeping.
inline constexpr std::array<std::array<int, 2>, kDirections> kLatticeVector{
    {{2, 0}, {1, 1}, {-1, 1}, {-2, 0}, {-1, -1}, {1, -1}}};

// Real-valued unit vectors.
inline constexpr double kHalfSqrt3 = 0.86602540378443864676;
inline constexpr std::array<std::array<double, 2>, kDirections> kUnitVector{
    {{1.0, 0.0}, {0.5, kHalfSqrt3}, {-0.5, kHalfSqrt3}, {-1.0, 0.0}, {-0.5, -kHalfSqrt3}, {0.5, -kHalfSqrt3}}};

constexpr int opposite(int d) { return (d + 3) % kDirections; }
constexpr std::uint8_t bit(int d) { return static_cast<std::uint8_t>(1u << d); }

struct Cell {
  Index x = 0;
  Index y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// A cell whose direction bit is force-set with probability `rate` every
// step, modeling an external current that does not reverse.
struct StreamCell {
  Cell cell;
  int direction = 0;
  double rate = 1.0;
};

namespace detail {

// table[parity][state] -> post-collision state.
inline constexpr auto kCollision = [] {
  std::array<std::array<std::uint8_t, 64>, 2> t{};
  for (int parity = 0; parity < 2; ++parity)
    for (int s = 0; s < 64; ++s) t[parity][s] = static_cast<std::uint8_t>(s);
  for (int d = 0; d < 3; ++d) {
    const int in = bit(d) | bit(d + 3);
    t[0][in] = bit((d + 5) % 6) | bit((d + 2) % 6);  // clockwise
    t[1][in] = bit((d + 1) % 6) | bit((d + 4) % 6);  // counterclockwise
  }
  const int even = bit(0) | bit(2) | bit(4);
  const int odd = bit(1) | bit(3) | bit(5);
  for (int parity = 0; parity < 2; ++parity) {
    t[parity][even] = static_cast<std::uint8_t>(odd);
    t[parity][odd] = static_cast<std::uint8_t>(even);
  }
  return t;
}();

}  // namespace detail

inline std::uint8_t collide(std::uint8_t state, int parity) { return detail::kCollision[parity & 1][state & kAllDirections]; }

class LatticeState {
 public:
  LatticeState() = default;
  LatticeState(Index width, Index height)
      : width_(width), height_(height), cells_(checked_area(width, height), 0), obstacle_(cells_.size(), 0) {}

  Index width() const { return width_; }
  Index height() const { return height_; }
  Index area() const { return width_ * height_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y * width_ + c.x); }
  Cell cell_at(std::size_t i) const { return Cell{static_cast<Index>(i) % width_, static_cast<Index>(i) / width_}; }

  // Periodic neighbor along direction d.
  Cell neighbor(Cell c, int d) const {
    const bool odd = (c.y & 1) != 0;
    Index x = c.x, y = c.y;
    switch (d) {
      case 0: ++x; break;
      case 1: ++y; x += odd ? 1 : 0; break;
      case 2: ++y; x -= odd ? 0 : 1; break;
      case 3: --x; break;
      case 4: --y; x -= odd ? 0 : 1; break;
      default: --y; x += odd ? 1 : 0; break;
    }
    return Cell{(x % width_ + width_) % width_, (y % height_ + height_) % height_};
  }

  std::uint8_t occupancy(Cell c) const { return cells_[index(c)]; }
  bool occupied(Cell c, int d) const { return (occupancy(c) & bit(d)) != 0; }
  bool is_obstacle(Cell c) const { return obstacle_[index(c)] != 0; }

  void set_occupancy(Cell c, std::uint8_t bits) {
    require(in_bounds(c), "lattice: cell out of bounds");
    require(!is_obstacle(c) || bits == 0, "lattice: obstacles cannot hold particles");
    cells_[index(c)] = bits & kAllDirections;
  }

  void set_obstacle(Cell c, bool value = true) {
    require(in_bounds(c), "lattice: cell out of bounds");
    obstacle_[index(c)] = value ? 1 : 0;
    if (value) cells_[index(c)] = 0;
  }

  void add_stream(const StreamCell& s) {
    require(in_bounds(s.cell) && !is_obstacle(s.cell), "lattice: stream cell must be an in-bounds fluid cell");
    require(s.direction >= 0 && s.direction < kDirections, "lattice: stream direction out of range");
    require(s.rate >= 0.0 && s.rate <= 1.0, "lattice: stream rate must lie in [0, 1]");
    streams_.push_back(s);
  }
  const std::vector<StreamCell>& streams() const { return streams_; }
  void clear_streams() { streams_.clear(); }

  int time_parity() const { return static_cast<int>(step_count_ & 1); }
  std::uint64_t step_count() const { return step_count_; }
  std::uint64_t stream_seed() const { return stream_seed_; }
  void set_stream_seed(std::uint64_t seed) { stream_seed_ = seed; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }

  std::vector<std::uint8_t>& cells() { return cells_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  const std::vector<std::uint8_t>& obstacles() const { return obstacle_; }

  Index particle_count() const {
    Index n = 0;
    for (std::uint8_t c : cells_) n += std::popcount(c);
    return n;
  }

  // Total momentum in the integer lattice basis.
  std::array<Index, 2> momentum() const {
    std::array<Index, 2> p{0, 0};
    for (std::uint8_t c : cells_)
      for (int d = 0; d < kDirections; ++d)
        if (c & bit(d)) {
          p[0] += kLatticeVector[d][0];
          p[1] += kLatticeVector[d][1];
        }
    return p;
  }

  bool obstacles_empty_of_particles() const {
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (obstacle_[i] && cells_[i]) return false;
    return true;
  }

  // Same occupancy, obstacles and clock.
  bool same_configuration(const LatticeState& o) const {
    return width_ == o.width_ && height_ == o.height_ && cells_ == o.cells_ && obstacle_ == o.obstacle_ &&
           step_count_ == o.step_count_;
  }

 private:
  static std::size_t checked_area(Index w, Index h) {
    require(w >= 2 && h >= 2, "lattice: width and height must be >= 2");
    require(h % 2 == 0, "lattice: height must be even for periodic hexagonal wrap");
    return static_cast<std::size_t>(w * h);
  }

  Index width_ = 0;
  Index height_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<std::uint8_t> obstacle_;
  std::vector<StreamCell> streams_;
  std::uint64_t step_count_ = 0;
  std::uint64_t stream_seed_ = 0;
};

namespace detail {

inline double stream_draw(std::uint64_t seed, std::uint64_t step, std::size_t cell, int direction) {
  const std::uint64_t h = derive_seed(derive_seed(seed, step), cell * 8 + static_cast<std::uint64_t>(direction));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline LatticeState step(const LatticeState& in) {
  LatticeState out = in;
  const int parity = in.time_parity();
  const auto& src = in.cells();
  const auto& wall = in.obstacles();
  auto& dst = out.cells();
  std::fill(dst.begin(), dst.end(), std::uint8_t{0});
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (wall[i] || !src[i]) continue;
    const std::uint8_t post = collide(src[i], parity);
    const Cell c = in.cell_at(i);
    for (int d = 0; d < kDirections; ++d) {
      if (!(post & bit(d))) continue;
      const std::size_t n = in.index(in.neighbor(c, d));
      if (wall[n])
        dst[i] |= bit(opposite(d));
      else
        dst[n] |= bit(d);
    }
  }
  for (const auto& s : in.streams())
    if (detail::stream_draw(in.stream_seed(), in.step_count(), in.index(s.cell), s.direction) < s.rate)
      dst[in.index(s.cell)] |= bit(s.direction);
  out.set_step_count(in.step_count() + 1);
  return out;
}

struct ReverseStep {
  LatticeState state;
  bool exact = true;  // false when stream cells broke closure
};

// Inverse of step: un-propagate, then undo the collision of the matching
// parity.
inline ReverseStep step_reverse(const LatticeState& in) {
  require(in.step_count() > 0, "step_reverse: state is at time zero");
  ReverseStep r{in, in.streams().empty()};
  LatticeState& out = r.state;
  out.set_step_count(in.step_count() - 1);
  const int parity = out.time_parity();
  const auto& src = in.cells();
  const auto& wall = in.obstacles();
  std::vector<std::uint8_t> pre(src.size(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (wall[i] || !src[i]) continue;
    const Cell c = in.cell_at(i);
    for (int d = 0; d < kDirections; ++d) {
      if (!(src[i] & bit(d))) continue;
      const std::size_t from = in.index(in.neighbor(c, opposite(d)));
      if (wall[from])
        pre[i] |= bit(opposite(d));  // was reflected in place
      else
        pre[from] |= bit(d);
    }
  }
  auto& dst = out.cells();
  for (std::size_t i = 0; i < pre.size(); ++i) dst[i] = pre[i] ? collide(pre[i], parity ^ 1) : 0;
  return r;
}

// Hexagonal (cube) distance, ignoring periodic images.
inline Index hex_distance(Cell a, Cell b) {
  auto q = [](Cell c) { return c.x - (c.y - (c.y & 1)) / 2; };
  const Index dq = q(a) - q(b);
  const Index dr = a.y - b.y;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

struct PulsePattern {
  Index radius = 2;
  double amplitude = 1.0;  // probability of each direction bit in the disc
  std::uint64_t seed = 0;
};

// Radially symmetric density pulse: every direction bit of every fluid cell
// within `radius` of the center is set with probability `amplitude`.
inline LatticeState emit_source(const LatticeState& in, Cell center, const PulsePattern& pattern) {
  require(in.in_bounds(center), "emit_source: source cell out of bounds");
  require(!in.is_obstacle(center), "emit_source: source cell is an obstacle");
  require(pattern.radius >= 0 && pattern.amplitude >= 0.0 && pattern.amplitude <= 1.0,
          "emit_source: radius must be >= 0 and amplitude in [0, 1]");
  LatticeState out = in;
  if (pattern.amplitude == 0.0) return out;
  Rng rng(pattern.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index y = 0; y < in.height(); ++y)
    for (Index x = 0; x < in.width(); ++x) {
      const Cell c{x, y};
      if (hex_distance(c, center) > pattern.radius || in.is_obstacle(c)) continue;
      std::uint8_t bits = in.occupancy(c);
      for (int d = 0; d < kDirections; ++d)
        if (u(rng) < pattern.amplitude) bits |= bit(d);
      out.set_occupancy(c, bits);
    }
  return out;
}

// Particles per cell scaled to 0..252 (obstacles 255), as a binary PGM with
// row 0 at the bottom of the image.
inline void write_density_pgm(const LatticeState& s, std::ostream& out) {
  out << "P5\n" << s.width() << ' ' << s.height() << "\n255\n";
  for (Index y = s.height() - 1; y >= 0; --y)
    for (Index x = 0; x < s.width(); ++x) {
      const Cell c{x, y};
      const auto v = s.is_obstacle(c) ? 255 : 42 * std::popcount(s.occupancy(c));
      out.put(static_cast<char>(v));
    }
}

}  // namespace revcomm::lattice
