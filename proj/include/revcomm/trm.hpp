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

// Time-reversal mirror on the lattice gas.
//
// The outer ring of cells is an open boundary: after every step it is read
// and then emptied. Mirror cells are a subset of the ring; each records the
// net particle momentum along its outward normal. Replay runs the automaton
// forward again while mirror cells re-emit the reversed recording into
// their inward (or outward) direction bits.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "revcomm/lattice.hpp"

namespace revcomm::lattice {

enum class MirrorEdge { kLeft, kRight, kBottom, kTop };

inline std::string to_string(MirrorEdge e) {
  switch (e) {
    case MirrorEdge::kLeft: return "left";
    case MirrorEdge::kRight: return "right";
    case MirrorEdge::kBottom: return "bottom";
    default: return "top";
  }
}

inline MirrorEdge mirror_edge_from_string(const std::string& s) {
  if (s == "left") return MirrorEdge::kLeft;
  if (s == "right") return MirrorEdge::kRight;
  if (s == "bottom") return MirrorEdge::kBottom;
  if (s == "top") return MirrorEdge::kTop;
  throw InvalidInput("unknown mirror edge '" + s + "'");
}

inline const std::vector<MirrorEdge>& all_edges() {
  static const std::vector<MirrorEdge> e{MirrorEdge::kLeft, MirrorEdge::kRight, MirrorEdge::kBottom, MirrorEdge::kTop};
  return e;
}

struct MirrorCell {
  Cell cell;
  std::array<double, 2> normal{0.0, 0.0};  // outward unit normal
};

inline bool on_boundary(const LatticeState& s, Cell c) {
  return c.x == 0 || c.y == 0 || c.x == s.width() - 1 || c.y == s.height() - 1;
}

// Ring cells along the requested edges, in edge order. A corner belongs to
// the first listed edge that contains it.
inline std::vector<MirrorCell> mirror_cells(const LatticeState& s, const std::vector<MirrorEdge>& edges) {
  require(!edges.empty(), "mirror: empty edge list");
  std::vector<MirrorCell> out;
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(s.area()), 0);
  auto add = [&](Cell c, std::array<double, 2> n) {
    if (taken[s.index(c)]) return;
    require(!s.is_obstacle(c), "mirror: mirror cells must not be obstacles");
    taken[s.index(c)] = 1;
    out.push_back({c, n});
  };
  for (MirrorEdge e : edges) switch (e) {
      case MirrorEdge::kLeft:
        for (Index y = 0; y < s.height(); ++y) add({0, y}, {-1.0, 0.0});
        break;
      case MirrorEdge::kRight:
        for (Index y = 0; y < s.height(); ++y) add({s.width() - 1, y}, {1.0, 0.0});
        break;
      case MirrorEdge::kBottom:
        for (Index x = 0; x < s.width(); ++x) add({x, 0}, {0.0, -1.0});
        break;
      case MirrorEdge::kTop:
        for (Index x = 0; x < s.width(); ++x) add({x, s.height() - 1}, {0.0, 1.0});
        break;
    }
  return out;
}

inline double normal_component(int d, const std::array<double, 2>& n) {
  return kUnitVector[d][0] * n[0] + kUnitVector[d][1] * n[1];
}

// Signed momentum along the outward normal of the particles in a cell.
inline double normal_flux(std::uint8_t bits, const std::array<double, 2>& n) {
  double v = 0.0;
  for (int d = 0; d < kDirections; ++d)
    if (bits & bit(d)) v += normal_component(d, n);
  return v;
}

// Flux of one full set of outward bits; the scale of a recorded sample.
inline double unit_flux(const std::array<double, 2>& n) {
  double v = 0.0;
  for (int d = 0; d < kDirections; ++d) v += std::max(0.0, normal_component(d, n));
  return v;
}

// Empties the ring; returns the number of particles removed.
inline Index absorb_boundary(LatticeState& s) {
  Index removed = 0;
  auto& cells = s.cells();
  for (Index y = 0; y < s.height(); ++y)
    for (Index x = 0; x < s.width(); ++x) {
      const Cell c{x, y};
      if (!on_boundary(s, c)) continue;
      auto& v = cells[s.index(c)];
      removed += std::popcount(v);
      v = 0;
    }
  return removed;
}

enum class ResolutionMode { kFull, kOneTrit };

inline std::string to_string(ResolutionMode m) { return m == ResolutionMode::kFull ? "full" : "one_trit"; }

inline ResolutionMode resolution_from_string(const std::string& s) {
  if (s == "full") return ResolutionMode::kFull;
  if (s == "one_trit") return ResolutionMode::kOneTrit;
  throw InvalidInput("unknown resolution mode '" + s + "'");
}

struct TrmRecording {
  std::vector<MirrorCell> mirror;
  std::vector<double> samples;  // samples[t * mirror.size() + i]
  ResolutionMode mode = ResolutionMode::kFull;
  Index duration = 0;

  double sample(Index t, std::size_t i) const { return samples[static_cast<std::size_t>(t) * mirror.size() + i]; }
};

inline double trit(double v, double theta) { return std::abs(v) <= theta ? 0.0 : (v > 0.0 ? 1.0 : -1.0); }

// `states[t]` is the lattice after step t, before the ring is emptied.
inline TrmRecording record_at_mirror(const std::vector<LatticeState>& states, const std::vector<MirrorCell>& mirror,
                                     ResolutionMode mode, double theta = 0.0) {
  require(!mirror.empty(), "record_at_mirror: empty mirror set");
  require(theta >= 0.0, "record_at_mirror: dead zone must be >= 0");
  TrmRecording rec{mirror, {}, mode, static_cast<Index>(states.size())};
  rec.samples.reserve(states.size() * mirror.size());
  for (const auto& s : states)
    for (const auto& m : mirror) {
      require(!s.is_obstacle(m.cell), "record_at_mirror: mirror cell is an obstacle");
      const double v = normal_flux(s.occupancy(m.cell), m.normal);
      rec.samples.push_back(mode == ResolutionMode::kFull ? v : trit(v, theta));
    }
  return rec;
}

inline TrmRecording to_one_trit(const TrmRecording& full, double theta = 0.0) {
  require(full.mode == ResolutionMode::kFull, "to_one_trit: recording is already one-trit");
  TrmRecording out = full;
  out.mode = ResolutionMode::kOneTrit;
  for (double& v : out.samples) v = trit(v, theta);
  return out;
}

inline TrmRecording zero_recording(const std::vector<MirrorCell>& mirror, Index duration, ResolutionMode mode) {
  return {mirror, std::vector<double>(static_cast<std::size_t>(duration) * mirror.size(), 0.0), mode, duration};
}

struct ForwardRun {
  std::vector<LatticeState> raw;  // after each step, before absorption
  LatticeState final_state;       // after the last absorption
  Index absorbed = 0;
};

inline ForwardRun run_forward(const LatticeState& initial, Index k) {
  require(k >= 0, "run_forward: k must be >= 0");
  ForwardRun run{{}, initial, 0};
  run.raw.reserve(static_cast<std::size_t>(k));
  for (Index t = 0; t < k; ++t) {
    run.final_state = step(run.final_state);
    run.raw.push_back(run.final_state);
    run.absorbed += absorb_boundary(run.final_state);
  }
  return run;
}

struct ReplayOptions {
  double one_trit_quantum = 0.5;  // injection probability per bit for a +-1 sample
  std::uint64_t seed = 0;
};

struct ReplayResult {
  std::vector<LatticeState> states;  // after each replay step and absorption
  LatticeState final_state;
};

// Runs k steps. Before step j every mirror cell re-emits sample k-1-j:
// a positive value sets its inward bits, a negative value its outward bits,
// each with probability |v| / unit_flux (full) or a fixed quantum
// (one-trit).
inline ReplayResult replay_reversed(const LatticeState& state_at_k, const TrmRecording& rec, Index k,
                                    const ReplayOptions& opt = {}) {
  require(rec.duration == k, "replay_reversed: recording duration does not match k");
  require(rec.samples.size() == static_cast<std::size_t>(k) * rec.mirror.size(),
          "replay_reversed: recording has the wrong number of samples");
  require(opt.one_trit_quantum >= 0.0 && opt.one_trit_quantum <= 1.0, "replay_reversed: quantum must lie in [0, 1]");
  ReplayResult out{{}, state_at_k};
  out.states.reserve(static_cast<std::size_t>(k));
  auto& s = out.final_state;
  for (Index j = 0; j < k; ++j) {
    const Index t = k - 1 - j;
    for (std::size_t i = 0; i < rec.mirror.size(); ++i) {
      const double v = rec.sample(t, i);
      if (v == 0.0) continue;
      const auto& m = rec.mirror[i];
      const double p = rec.mode == ResolutionMode::kFull ? std::min(1.0, std::abs(v) / unit_flux(m.normal))
                                                         : opt.one_trit_quantum;
      const double sign = v > 0.0 ? -1.0 : 1.0;  // inward for outgoing arrivals
      std::uint8_t bits = s.occupancy(m.cell);
      for (int d = 0; d < kDirections; ++d) {
        if (sign * normal_component(d, m.normal) <= 1e-12) continue;
        if (detail::stream_draw(opt.seed, static_cast<std::uint64_t>(j), s.index(m.cell), d) < p) bits |= bit(d);
      }
      s.set_occupancy(m.cell, bits);
    }
    s = step(s);
    absorb_boundary(s);
    out.states.push_back(s);
  }
  return out;
}

// Particles in the cells within `radius` of `center`.
inline Index disc_mass(const LatticeState& s, Cell center, Index radius) {
  Index n = 0;
  for (Index y = std::max<Index>(0, center.y - radius); y <= std::min(s.height() - 1, center.y + radius); ++y)
    for (Index x = std::max<Index>(0, center.x - radius - 1); x <= std::min(s.width() - 1, center.x + radius + 1); ++x)
      if (hex_distance({x, y}, center) <= radius) n += std::popcount(s.occupancy({x, y}));
  return n;
}

struct FocusWindow {
  Index begin = 0;  // state indices [begin, end)
  Index end = 0;
  Index smoothing = 3;
};

// Peak over the window of the trailing moving average of disc mass.
inline double peak_focus(const std::vector<LatticeState>& states, Cell center, Index radius, const FocusWindow& w) {
  require(w.begin >= 0 && w.begin < w.end && w.end <= static_cast<Index>(states.size()),
          "refocusing: window outside the replay");
  require(w.smoothing >= 1, "refocusing: smoothing must be >= 1");
  double best = 0.0;
  for (Index t = w.begin; t < w.end; ++t) {
    const Index from = std::max<Index>(0, t - w.smoothing + 1);
    double sum = 0.0;
    for (Index u = from; u <= t; ++u) sum += static_cast<double>(disc_mass(states[static_cast<std::size_t>(u)], center, radius));
    best = std::max(best, sum / static_cast<double>(t - from + 1));
  }
  return best;
}

// Random interior cells whose disc is obstacle-free, off the ring and
// disjoint from the source disc.
inline std::vector<Cell> control_cells(const LatticeState& s, Cell source, Index radius, Index count,
                                       std::uint64_t seed) {
  std::vector<Cell> pool;
  for (Index y = radius + 1; y < s.height() - radius - 1; ++y)
    for (Index x = radius + 1; x < s.width() - radius - 1; ++x) {
      const Cell c{x, y};
      if (hex_distance(c, source) <= 2 * radius + 1) continue;
      bool clear = true;
      for (Index yy = y - radius; yy <= y + radius && clear; ++yy)
        for (Index xx = x - radius - 1; xx <= x + radius + 1 && clear; ++xx)
          if (hex_distance({xx, yy}, c) <= radius && s.is_obstacle({xx, yy})) clear = false;
      if (clear) pool.push_back(c);
    }
  require(static_cast<Index>(pool.size()) >= count, "control_cells: not enough obstacle-free control cells");
  Rng rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

struct FocusScore {
  double source = 0.0;   // peak disc mass at the source
  double control = 0.0;  // same statistic averaged over control cells
  double ratio = 0.0;    // (source + 1) / (control + 1)
};

inline FocusScore focus_score(const std::vector<LatticeState>& states, Cell source, Index radius,
                              const FocusWindow& w, const std::vector<Cell>& controls) {
  require(!states.empty(), "refocusing: no states");
  require(!states.front().is_obstacle(source), "refocusing: source inside an obstacle");
  require(!controls.empty(), "refocusing: no control cells");
  FocusScore f;
  f.source = peak_focus(states, source, radius, w);
  for (Cell c : controls) f.control += peak_focus(states, c, radius, w);
  f.control /= static_cast<double>(controls.size());
  f.ratio = (f.source + 1.0) / (f.control + 1.0);
  return f;
}

// Focus ratio of an exact reversal: run k steps on the lattice without a
// mirror or open boundary, then undo them with step_reverse.
inline FocusScore reference_focus(const LatticeState& initial, Index k, Cell source, Index radius,
                                  const FocusWindow& w, const std::vector<Cell>& controls) {
  LatticeState s = initial;
  s.clear_streams();
  for (Index t = 0; t < k; ++t) s = step(s);
  std::vector<LatticeState> back;
  back.reserve(static_cast<std::size_t>(k));
  for (Index t = 0; t < k; ++t) {
    s = step_reverse(s).state;
    back.push_back(s);
  }
  return focus_score(back, source, radius, w, controls);
}

inline double refocusing_metric(const FocusScore& replay, const FocusScore& reference) {
  require(reference.ratio > 0.0, "refocusing: degenerate reference");
  return std::clamp(replay.ratio / reference.ratio, 0.0, 1.0);
}

// Metric of a replay whose source disc looks exactly like the controls.
inline double background_metric(const FocusScore& reference) { return std::clamp(1.0 / reference.ratio, 0.0, 1.0); }

// Count-based mirror readout quantized to m bits per cell and step: c
// arrivals map to floor(c / 6 * 2^m) / 2^m * 6.
inline double quantize_arrivals(Index count, int bits) {
  const double levels = std::ldexp(1.0, bits);
  return std::floor(static_cast<double>(count) / kDirections * levels) / levels * kDirections;
}

// Fraction of the emitted particles that reach the mirror within k steps,
// read through an m-bit converter.
inline double backscatter_score(const LatticeState& initial, const std::vector<MirrorCell>& mirror, int adc_bits,
                                Index k) {
  require(adc_bits >= 1, "backscatter: adc bits must be >= 1");
  require(k >= 0, "backscatter: k must be >= 0");
  const Index emitted = initial.particle_count();
  if (k == 0 || emitted == 0) return 0.0;
  LatticeState s = initial;
  double sum = 0.0;
  for (Index t = 0; t < k; ++t) {
    s = step(s);
    for (const auto& m : mirror) sum += quantize_arrivals(std::popcount(s.occupancy(m.cell)), adc_bits);
    absorb_boundary(s);
  }
  return sum / static_cast<double>(emitted);
}

}  // namespace revcomm::lattice
