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

// Reversing Petri net used as a token-conserving distributed optimizer.
//
// Places are antennas; a token on a place switches that antenna on. Each
// undirected transition (a, b) moves a token between adjacent places and is
// judged inside a neighborhood shared by both endpoints:
//
//   1. (a, b) is enabled iff exactly one of a, b holds a token.
//   2. An enabled move a -> b fires only if the equal-power sum capacity of
//      the tokened antennas in the shared neighborhood strictly increases.
//   3. Among the moves available from one place, the largest increase wins
//      (ties go to the smaller destination index).
//   4. Places are visited in a seeded random order, one move per tokened
//      place per pass, until a pass fires nothing.
//
// Every fired move is appended to the history, and reverse(k) undoes the
// last k moves exactly.

#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "revcomm/capacity.hpp"

namespace revcomm::rpn {

struct TransitionRecord {
  Index from_place = 0;
  Index to_place = 0;
  Index pass_index = 0;
  double capacity_before = 0.0;
  double capacity_after = 0.0;
};

// One undirected transition and the neighborhood its moves are judged in.
struct EdgeSpec {
  Index a = 0;
  Index b = 0;
  AntennaSet neighborhood;
};

class RpnNet {
 public:
  RpnNet() = default;

  // Arbitrary topology. Self-loops are dropped; a repeated pair keeps the
  // first neighborhood given for it.
  RpnNet(Index num_places, const std::vector<EdgeSpec>& edges)
      : adjacency_(static_cast<std::size_t>(checked_places(num_places))),
        marking_(static_cast<std::size_t>(num_places), 0) {
    for (const auto& e : edges) {
      require(e.a >= 0 && e.a < num_places && e.b >= 0 && e.b < num_places, "RpnNet: edge endpoint out of range");
      if (e.a == e.b) continue;
      const auto key = std::minmax(e.a, e.b);
      if (neighborhood_.count(key)) continue;
      require(distinct_in_range(e.neighborhood, num_places), "RpnNet: neighborhood must be distinct places");
      require(std::find(e.neighborhood.begin(), e.neighborhood.end(), e.a) != e.neighborhood.end() &&
                  std::find(e.neighborhood.begin(), e.neighborhood.end(), e.b) != e.neighborhood.end(),
              "RpnNet: both endpoints must belong to the edge's neighborhood");
      neighborhood_.emplace(key, e.neighborhood);
      adjacency_[static_cast<std::size_t>(e.a)].push_back(e.b);
      adjacency_[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  }

  Index num_places() const { return static_cast<Index>(marking_.size()); }
  const std::vector<Index>& neighbors(Index place) const { return adjacency_.at(static_cast<std::size_t>(place)); }

  bool adjacent(Index a, Index b) const { return neighborhood_.count(std::minmax(a, b)) != 0; }

  // Shared neighborhood of the transition a -> b (same set for b -> a).
  const AntennaSet& neighborhood_of(Index a, Index b) const {
    const auto it = neighborhood_.find(std::minmax(a, b));
    if (it == neighborhood_.end()) throw InvalidInput("RpnNet: places are not adjacent");
    return it->second;
  }

  std::vector<std::pair<Index, Index>> edges() const {
    std::vector<std::pair<Index, Index>> out;
    for (const auto& [key, _] : neighborhood_) out.push_back(key);
    return out;
  }

  bool has_token(Index place) const { return marking_.at(static_cast<std::size_t>(place)) != 0; }
  const std::vector<std::uint8_t>& marking() const { return marking_; }

  Index token_count() const { return std::count(marking_.begin(), marking_.end(), std::uint8_t{1}); }

  AntennaSet tokened_places() const {
    AntennaSet out;
    for (Index p = 0; p < num_places(); ++p)
      if (has_token(p)) out.push_back(p);
    return out;
  }

  // Places tokens on exactly `places` and clears the history.
  void set_marking(const AntennaSet& places) {
    require(distinct_in_range(places, num_places()), "set_marking: places must be distinct and in range");
    std::fill(marking_.begin(), marking_.end(), std::uint8_t{0});
    for (Index p : places) marking_[static_cast<std::size_t>(p)] = 1;
    initial_marking_ = marking_;
    history_.clear();
  }

  const std::vector<std::uint8_t>& initial_marking() const { return initial_marking_; }
  const std::vector<TransitionRecord>& history() const { return history_; }

  // Rule 1: exactly one endpoint holds a token.
  bool enabled(Index a, Index b) const {
    if (!adjacent(a, b)) throw InvalidInput("enabled: places are not adjacent");
    return has_token(a) != has_token(b);
  }

  void fire(const TransitionRecord& record) {
    require(enabled(record.from_place, record.to_place) && has_token(record.from_place),
            "fire: transition is not enabled in the token's direction");
    move_token(record.from_place, record.to_place);
    history_.push_back(record);
  }

  // Undoes the last k transitions, most recent first.
  void reverse(std::size_t k) {
    require(k <= history_.size(), "reverse: k exceeds history length");
    for (std::size_t i = 0; i < k; ++i) {
      const TransitionRecord rec = history_.back();
      history_.pop_back();
      move_token(rec.to_place, rec.from_place);
    }
  }

 private:
  static Index checked_places(Index n) {
    require(n >= 1, "RpnNet: need at least one place");
    return n;
  }

  void move_token(Index from, Index to) {
    auto& src = marking_[static_cast<std::size_t>(from)];
    auto& dst = marking_[static_cast<std::size_t>(to)];
    require(src == 1 && dst == 0, "RpnNet: token move would break the one-token-per-place rule");
    src = 0;
    dst = 1;
  }

  std::vector<std::vector<Index>> adjacency_;
  std::map<std::pair<Index, Index>, AntennaSet> neighborhood_;
  std::vector<std::uint8_t> marking_;
  std::vector<std::uint8_t> initial_marking_;
  std::vector<TransitionRecord> history_;
};

// rows x cols array folded into a torus. Place p = row * cols + col (the
// 1-based antenna label is p + 1). Von Neumann neighbors exchange tokens.
// Neighborhoods are pairs of adjacent full columns, listed left column
// first, top to bottom:
//   horizontal (r, c) - (r, c+1):          columns {c, c+1}
//   vertical   (r, c) - (r+1, c), r even:  columns {c-1, c}
//   vertical   (r, c) - (r+1, c), r odd:   columns {c, c+1}
// On the 4 x 16 torus this gives, for antenna 1, moves to 16 and 17 judged in
// {16,32,48,64,1,17,33,49} and moves to 2 and 49 judged in
// {1,17,33,49,2,18,34,50}.
inline RpnNet build_toroidal_net(Index rows, Index cols) {
  require(rows >= 2 && cols >= 2, "build_toroidal_net: rows and cols must be >= 2");
  auto place = [&](Index r, Index c) { return ((r % rows + rows) % rows) * cols + ((c % cols + cols) % cols); };
  auto column_pair = [&](Index left) {
    AntennaSet out;
    for (Index dc = 0; dc < 2; ++dc)
      for (Index r = 0; r < rows; ++r) {
        const Index p = place(r, left + dc);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
      }
    return out;
  };

  std::vector<EdgeSpec> edges;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      edges.push_back({place(r, c), place(r, c + 1), column_pair(c)});
      edges.push_back({place(r, c), place(r + 1, c), column_pair(r % 2 == 0 ? c - 1 : c)});
    }
  return RpnNet(rows * cols, edges);
}

// Equal-power sum capacity of `tokens`, with N_TS = |tokens|.
inline double neighborhood_capacity(const ChannelTensor& h, const AntennaSet& tokens, double rho) {
  if (tokens.empty()) return 0.0;
  const CapacityParams params{rho, h.n_r(), static_cast<Index>(tokens.size())};
  return mean_capacity_over_subcarriers(h, tokens, PowerAllocation::equal(h.n_r()), params);
}

struct GateResult {
  double delta = 0.0;
  double capacity_before = 0.0;
  double capacity_after = 0.0;
};

namespace detail {

inline AntennaSet tokens_in(const RpnNet& net, const AntennaSet& neighborhood) {
  AntennaSet out;
  for (Index p : neighborhood)
    if (net.has_token(p)) out.push_back(p);
  return out;
}

inline void check_dimensions(const RpnNet& net, const ChannelTensor& h) {
  require(net.num_places() == h.n_t(), "rpn: number of places != number of channel antennas");
}

// Capacity before and after moving the token a -> b inside the shared
// neighborhood, without the positivity filter.
inline GateResult evaluate_move(const RpnNet& net, const ChannelTensor& h, double rho, Index a, Index b) {
  const AntennaSet before = tokens_in(net, net.neighborhood_of(a, b));
  if (before.empty()) throw InvalidInput("gate: no tokened antenna in the neighborhood");
  AntennaSet after;
  for (Index p : before) after.push_back(p == a ? b : p);
  GateResult g;
  g.capacity_before = neighborhood_capacity(h, before, rho);
  g.capacity_after = neighborhood_capacity(h, after, rho);
  g.delta = g.capacity_after - g.capacity_before;
  return g;
}

}  // namespace detail

// Rule 2. Returns the strictly positive improvement of moving the token
// a -> b, or nothing.
inline std::optional<GateResult> gate(const RpnNet& net, const ChannelTensor& h, double rho, Index a, Index b) {
  detail::check_dimensions(net, h);
  require(net.enabled(a, b) && net.has_token(a), "gate: move a -> b is not enabled with the token at a");
  GateResult g = detail::evaluate_move(net, h, rho, a, b);
  if (g.delta > 0.0) return g;
  return std::nullopt;
}

// One pass over all places in a seeded random order (rules 3 and 4).
// Returns the number of transitions fired.
inline Index step_pass(RpnNet& net, const ChannelTensor& h, double rho, std::uint64_t seed, Index pass_index = 0) {
  detail::check_dimensions(net, h);
  std::vector<Index> order(static_cast<std::size_t>(net.num_places()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Index fired = 0;
  std::vector<std::pair<const AntennaSet*, double>> before_cache;
  for (Index a : order) {
    if (!net.has_token(a)) continue;
    before_cache.clear();
    std::optional<std::pair<Index, GateResult>> best;
    for (Index b : net.neighbors(a)) {  // ascending, so ties keep the smaller b
      if (net.has_token(b)) continue;
      const AntennaSet& hood = net.neighborhood_of(a, b);
      const AntennaSet before = detail::tokens_in(net, hood);
      AntennaSet after;
      for (Index p : before) after.push_back(p == a ? b : p);
      // Several moves from a can share one neighborhood.
      auto cached = std::find_if(before_cache.begin(), before_cache.end(),
                                 [&](const auto& entry) { return entry.first == &hood; });
      if (cached == before_cache.end())
        cached = before_cache.insert(before_cache.end(), {&hood, neighborhood_capacity(h, before, rho)});
      GateResult g;
      g.capacity_before = cached->second;
      g.capacity_after = neighborhood_capacity(h, after, rho);
      g.delta = g.capacity_after - g.capacity_before;
      if (g.delta > 0.0 && (!best || g.delta > best->second.delta)) best.emplace(b, g);
    }
    if (!best) continue;
    net.fire(TransitionRecord{a, best->first, pass_index, best->second.capacity_before, best->second.capacity_after});
    ++fired;
  }
  return fired;
}

struct ConvergenceReport {
  Index passes_executed = 0;  // including the final quiet pass
  Index passes_used = 0;      // passes that fired at least one transition
  Index transitions_fired = 0;
  bool converged = false;
};

inline ConvergenceReport run_to_convergence(RpnNet& net, const ChannelTensor& h, double rho, std::uint64_t seed,
                                            Index max_passes = 50) {
  require(max_passes >= 1, "run_to_convergence: max_passes must be >= 1");
  ConvergenceReport report;
  for (Index pass = 0; pass < max_passes; ++pass) {
    const Index fired = step_pass(net, h, rho, derive_seed(seed, static_cast<std::uint64_t>(pass)), pass);
    ++report.passes_executed;
    if (fired == 0) {
      report.converged = true;
      break;
    }
    ++report.passes_used;
    report.transitions_fired += fired;
  }
  return report;
}

// JSON lines, one record per line.
inline void export_history(const RpnNet& net, std::ostream& out) {
  const auto old_precision = out.precision(17);
  for (const auto& r : net.history())
    out << "{\"from_place\":" << r.from_place << ",\"to_place\":" << r.to_place << ",\"pass_index\":" << r.pass_index
        << ",\"capacity_before\":" << r.capacity_before << ",\"capacity_after\":" << r.capacity_after << "}\n";
  out.precision(old_precision);
}

}  // namespace revcomm::rpn
