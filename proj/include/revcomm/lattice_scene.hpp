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

// Lattice scene description and the mirror experiments built on it.

#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "revcomm/trm.hpp"

namespace revcomm::lattice {

struct RectObstacle {
  Index x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
};

struct DiscObstacle {
  Cell center;
  Index radius = 0;
};

struct LatticeScene {
  Index width = 64;
  Index height = 64;
  Cell source{32, 32};
  Index pulse_radius = 2;
  double pulse_amplitude = 0.5;
  Index duration = 100;  // k
  double scatterer_density = 0.0;
  std::vector<RectObstacle> rects;
  std::vector<DiscObstacle> discs;
  std::vector<StreamCell> streams;
  std::vector<MirrorEdge> mirror = all_edges();
  Index focus_radius = 2;
  double window_fraction = 0.25;  // trailing part of the replay scored
  Index smoothing = 3;
  Index n_controls = 16;
  double one_trit_quantum = 0.5;
  double dead_zone = 0.0;
};

inline void validate(const LatticeScene& s) {
  require(s.width >= 8 && s.height >= 8 && s.height % 2 == 0, "scene: lattice must be at least 8x8 with even height");
  require(s.source.x > s.pulse_radius && s.source.y > s.pulse_radius && s.source.x < s.width - 1 - s.pulse_radius &&
              s.source.y < s.height - 1 - s.pulse_radius,
          "scene: source pulse must lie inside the ring");
  require(s.pulse_amplitude >= 0.0 && s.pulse_amplitude <= 1.0, "scene: pulse amplitude must lie in [0, 1]");
  require(s.duration >= 1, "scene: duration must be >= 1");
  require(s.scatterer_density >= 0.0 && s.scatterer_density < 1.0, "scene: scatterer density must lie in [0, 1)");
  require(s.focus_radius >= 0 && s.smoothing >= 1 && s.n_controls >= 1, "scene: invalid focus parameters");
  require(s.window_fraction > 0.0 && s.window_fraction <= 1.0, "scene: window fraction must lie in (0, 1]");
  require(!s.mirror.empty(), "scene: empty mirror");
}

// Obstacles, seeded scatterers and streams. Scatterers avoid the ring and
// the neighborhood of the source.
inline LatticeState build_lattice(const LatticeScene& scene, std::uint64_t seed) {
  validate(scene);
  LatticeState s(scene.width, scene.height);
  for (const auto& r : scene.rects)
    for (Index y = std::max<Index>(r.y0, 0); y <= std::min(r.y1, scene.height - 1); ++y)
      for (Index x = std::max<Index>(r.x0, 0); x <= std::min(r.x1, scene.width - 1); ++x) s.set_obstacle({x, y});
  for (const auto& d : scene.discs)
    for (Index y = 0; y < scene.height; ++y)
      for (Index x = 0; x < scene.width; ++x)
        if (hex_distance({x, y}, d.center) <= d.radius) s.set_obstacle({x, y});
  if (scene.scatterer_density > 0.0) {
    Rng rng(derive_seed(seed, 1));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Index y = 1; y < scene.height - 1; ++y)
      for (Index x = 1; x < scene.width - 1; ++x)
        if (u(rng) < scene.scatterer_density && hex_distance({x, y}, scene.source) > scene.pulse_radius + 2)
          s.set_obstacle({x, y});
  }
  require(!s.is_obstacle(scene.source), "scene: source cell is an obstacle");
  for (const auto& st : scene.streams) s.add_stream(st);
  s.set_stream_seed(derive_seed(seed, 2));
  return s;
}

inline LatticeState initial_pulse(const LatticeScene& scene, const LatticeState& medium, std::uint64_t seed) {
  return emit_source(medium, scene.source, {scene.pulse_radius, scene.pulse_amplitude, derive_seed(seed, 3)});
}

inline FocusWindow focus_window(const LatticeScene& scene) {
  const auto len = std::max<Index>(1, static_cast<Index>(std::ceil(scene.window_fraction * scene.duration)));
  return {scene.duration - len, scene.duration, scene.smoothing};
}

struct TrmComparison {
  Index emitted = 0;
  Index absorbed = 0;
  FocusScore reference;
  FocusScore full;       // configured mirror, full resolution
  FocusScore one_edge;   // first mirror edge only, full resolution
  FocusScore one_trit;   // configured mirror, one-trit resolution
  FocusScore zero;       // configured mirror, all-zero recording
  double metric_full = 0.0;
  double metric_one_edge = 0.0;
  double metric_one_trit = 0.0;
  double metric_zero = 0.0;
  double metric_background = 0.0;
};

// One realization: forward run, recordings at the configured mirror and at
// its first edge alone, replays, and scoring against an exact reversal.
inline TrmComparison run_trm_comparison(const LatticeScene& scene, std::uint64_t seed) {
  const LatticeState medium = build_lattice(scene, seed);
  const LatticeState init = initial_pulse(scene, medium, seed);
  const Index k = scene.duration;
  const ForwardRun fwd = run_forward(init, k);
  const auto mirror = mirror_cells(medium, scene.mirror);
  const auto edge = mirror_cells(medium, {scene.mirror.front()});
  const auto controls = control_cells(medium, scene.source, scene.focus_radius, scene.n_controls, derive_seed(seed, 4));
  const FocusWindow w = focus_window(scene);

  TrmComparison c;
  c.emitted = init.particle_count();
  c.absorbed = fwd.absorbed;
  c.reference = reference_focus(init, k, scene.source, scene.focus_radius, w, controls);
  const ReplayOptions opt{scene.one_trit_quantum, derive_seed(seed, 5)};
  auto score = [&](const TrmRecording& rec) {
    const auto rep = replay_reversed(fwd.final_state, rec, k, opt);
    return focus_score(rep.states, scene.source, scene.focus_radius, w, controls);
  };
  const TrmRecording full = record_at_mirror(fwd.raw, mirror, ResolutionMode::kFull);
  c.full = score(full);
  c.one_edge = score(record_at_mirror(fwd.raw, edge, ResolutionMode::kFull));
  c.one_trit = score(to_one_trit(full, scene.dead_zone));
  c.zero = score(zero_recording(mirror, k, ResolutionMode::kFull));
  c.metric_full = refocusing_metric(c.full, c.reference);
  c.metric_one_edge = refocusing_metric(c.one_edge, c.reference);
  c.metric_one_trit = refocusing_metric(c.one_trit, c.reference);
  c.metric_zero = refocusing_metric(c.zero, c.reference);
  c.metric_background = background_metric(c.reference);
  return c;
}

// Scene with scatterers at density d, read at the configured mirror with
// an m-bit converter after waiting k steps.
inline double backscatter_loss_experiment(LatticeScene scene, double density, int adc_bits, Index k,
                                          std::uint64_t seed) {
  require(density >= 0.0 && density < 1.0, "backscatter: density must lie in [0, 1)");
  scene.scatterer_density = density;
  const LatticeState medium = build_lattice(scene, seed);
  const LatticeState init = initial_pulse(scene, medium, seed);
  return backscatter_score(init, mirror_cells(medium, scene.mirror), adc_bits, k);
}

// JSON ---------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Cell& c) { j = nlohmann::json::array({c.x, c.y}); }
inline void from_json(const nlohmann::json& j, Cell& c) {
  require(j.is_array() && j.size() == 2, "scene: a cell is [x, y]");
  c = {j[0].get<Index>(), j[1].get<Index>()};
}

inline void to_json(nlohmann::json& j, const LatticeScene& s) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& r : s.rects) obstacles.push_back({{"rect", {r.x0, r.y0, r.x1, r.y1}}});
  for (const auto& d : s.discs) obstacles.push_back({{"disc", {d.center.x, d.center.y, d.radius}}});
  nlohmann::json streams = nlohmann::json::array();
  for (const auto& st : s.streams) streams.push_back({{"cell", st.cell}, {"direction", st.direction}, {"rate", st.rate}});
  nlohmann::json mirror = nlohmann::json::array();
  for (auto e : s.mirror) mirror.push_back(to_string(e));
  j = {{"width", s.width},
       {"height", s.height},
       {"source", s.source},
       {"pulse_radius", s.pulse_radius},
       {"pulse_amplitude", s.pulse_amplitude},
       {"duration", s.duration},
       {"scatterer_density", s.scatterer_density},
       {"obstacles", obstacles},
       {"streams", streams},
       {"mirror", mirror},
       {"focus_radius", s.focus_radius},
       {"window_fraction", s.window_fraction},
       {"smoothing", s.smoothing},
       {"n_controls", s.n_controls},
       {"one_trit_quantum", s.one_trit_quantum},
       {"dead_zone", s.dead_zone}};
}

// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, LatticeScene& s) {
  require(j.is_object(), "scene: expected a JSON object");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("width", s.width);
  get("height", s.height);
  get("source", s.source);
  get("pulse_radius", s.pulse_radius);
  get("pulse_amplitude", s.pulse_amplitude);
  get("duration", s.duration);
  get("scatterer_density", s.scatterer_density);
  get("focus_radius", s.focus_radius);
  get("window_fraction", s.window_fraction);
  get("smoothing", s.smoothing);
  get("n_controls", s.n_controls);
  get("one_trit_quantum", s.one_trit_quantum);
  get("dead_zone", s.dead_zone);
  if (j.contains("obstacles")) {
    s.rects.clear();
    s.discs.clear();
    for (const auto& o : j.at("obstacles")) {
      if (o.contains("rect")) {
        const auto v = o.at("rect").get<std::vector<Index>>();
        require(v.size() == 4, "scene: rect is [x0, y0, x1, y1]");
        s.rects.push_back({v[0], v[1], v[2], v[3]});
      } else if (o.contains("disc")) {
        const auto v = o.at("disc").get<std::vector<Index>>();
        require(v.size() == 3, "scene: disc is [x, y, radius]");
        s.discs.push_back({{v[0], v[1]}, v[2]});
      } else {
        throw InvalidInput("scene: obstacle must be a rect or a disc");
      }
    }
  }
  if (j.contains("streams")) {
    s.streams.clear();
    for (const auto& st : j.at("streams"))
      s.streams.push_back({st.at("cell").get<Cell>(), st.at("direction").get<int>(), st.value("rate", 1.0)});
  }
  if (j.contains("mirror")) {
    s.mirror.clear();
    const auto& m = j.at("mirror");
    if (m.is_string() && m.get<std::string>() == "all")
      s.mirror = all_edges();
    else
      for (const auto& e : m) s.mirror.push_back(mirror_edge_from_string(e.get<std::string>()));
  }
  validate(s);
}

}  // namespace revcomm::lattice
