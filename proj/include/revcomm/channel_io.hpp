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

// Persistence for channels and scenes.
//
// Channel tensor container (".rcht"), all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "RCHTNSR\0"
//   8       4     format version (uint32, currently 1)
//   12      4     reserved, zero
//   16      8     N_T (uint64)
//   24      8     N_R (uint64)
//   32      8     S   (uint64)
//   40      16*N  gains as (re, im) float64 pairs, row-major over (t, r, s):
//                 the entry for (t, r, s) is pair number (t*N_R + r)*S + s
//
// Scenes are stored as JSON (see to_json/from_json below).

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "revcomm/channel.hpp"

namespace revcomm {

static_assert(std::endian::native == std::endian::little,
              "channel container I/O assumes a little-endian host");

namespace detail {
inline constexpr char kTensorMagic[8] = {'R', 'C', 'H', 'T', 'N', 'S', 'R', '\0'};
inline constexpr std::uint32_t kTensorVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw InvalidInput("channel container: truncated input");
  return value;
}
}  // namespace detail

inline void save_tensor(const ChannelTensor& h, std::ostream& out) {
  out.write(detail::kTensorMagic, sizeof(detail::kTensorMagic));
  detail::put<std::uint32_t>(out, detail::kTensorVersion);
  detail::put<std::uint32_t>(out, 0);
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(h.n_t()));
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(h.n_r()));
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(h.n_subcarriers()));
  for (Index t = 0; t < h.n_t(); ++t)
    for (Index r = 0; r < h.n_r(); ++r)
      for (Index s = 0; s < h.n_subcarriers(); ++s) {
        detail::put<double>(out, h.at(t, r, s).real());
        detail::put<double>(out, h.at(t, r, s).imag());
      }
  if (!out) throw std::runtime_error("channel container: write failed");
}

inline ChannelTensor load_tensor(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kTensorMagic, sizeof(magic)) != 0)
    throw InvalidInput("channel container: bad magic");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != detail::kTensorVersion)
    throw InvalidInput("channel container: unsupported version " + std::to_string(version));
  detail::get<std::uint32_t>(in);
  const auto n_t = detail::get<std::uint64_t>(in);
  const auto n_r = detail::get<std::uint64_t>(in);
  const auto n_s = detail::get<std::uint64_t>(in);
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;
  require(n_t >= 1 && n_r >= 1 && n_s >= 1 && n_t * n_r * n_s <= kMaxEntries &&
              n_t < kMaxEntries && n_r < kMaxEntries && n_s < kMaxEntries,
          "channel container: implausible dimensions");
  ChannelTensor h(static_cast<Index>(n_t), static_cast<Index>(n_r), static_cast<Index>(n_s));
  for (Index t = 0; t < h.n_t(); ++t)
    for (Index r = 0; r < h.n_r(); ++r)
      for (Index s = 0; s < h.n_subcarriers(); ++s) {
        const double re = detail::get<double>(in);
        const double im = detail::get<double>(in);
        h.at(t, r, s) = Complex(re, im);
      }
  return h;
}

inline void save_tensor(const ChannelTensor& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_tensor(h, out);
}

inline ChannelTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_tensor(in);
}

// JSON scene descriptor. Positions are [x, y] pairs in meters; the obstacle
// is {x_min, y_min, x_max, y_max} or null.
inline void to_json(nlohmann::json& j, const Point& p) { j = nlohmann::json::array({p.x, p.y}); }
inline void from_json(const nlohmann::json& j, Point& p) {
  require(j.is_array() && j.size() == 2, "scene json: a point must be [x, y]");
  p = Point{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline void to_json(nlohmann::json& j, const Rect& r) {
  j = {{"x_min", r.x_min}, {"y_min", r.y_min}, {"x_max", r.x_max}, {"y_max", r.y_max}};
}
inline void from_json(const nlohmann::json& j, Rect& r) {
  r = Rect{j.at("x_min").get<double>(), j.at("y_min").get<double>(), j.at("x_max").get<double>(),
           j.at("y_max").get<double>()};
}

inline void to_json(nlohmann::json& j, const Scene& s) {
  j = {{"antenna_positions", s.antenna_positions},
       {"user_positions", s.user_positions},
       {"scatterer_positions", s.scatterer_positions},
       {"obstacle", s.obstacle ? nlohmann::json(*s.obstacle) : nlohmann::json(nullptr)},
       {"carrier_frequency", s.carrier_frequency},
       {"bandwidth", s.bandwidth},
       {"num_subcarriers", s.num_subcarriers},
       {"rng_seed", s.rng_seed}};
}

inline void from_json(const nlohmann::json& j, Scene& s) {
  s.antenna_positions = j.at("antenna_positions").get<std::vector<Point>>();
  s.user_positions = j.at("user_positions").get<std::vector<Point>>();
  s.scatterer_positions = j.value("scatterer_positions", std::vector<Point>{});
  if (j.contains("obstacle") && !j.at("obstacle").is_null())
    s.obstacle = j.at("obstacle").get<Rect>();
  else
    s.obstacle.reset();
  s.carrier_frequency = j.at("carrier_frequency").get<double>();
  s.bandwidth = j.at("bandwidth").get<double>();
  s.num_subcarriers = j.at("num_subcarriers").get<Index>();
  s.rng_seed = j.value("rng_seed", std::uint64_t{0});
  validate(s);
}

}  // namespace revcomm
