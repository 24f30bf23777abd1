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

// Transmit antenna selection: RPN-driven (single and best-of-several),
// centralized greedy, uniform random and exhaustive search.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "revcomm/capacity.hpp"
#include "revcomm/rpn.hpp"

namespace revcomm {

struct SelectionOutcome {
  AntennaSet selected;  // sorted
  double rate_equal_power = 0.0;
  std::optional<double> rate_waterfilled;  // empty when zero forcing is infeasible
  Index passes_used = 0;
  Index transitions_fired = 0;
  bool converged = true;
  Index evaluations = 0;  // objective evaluations (subset capacities computed)
  std::string algorithm_tag;
};

// Equal-power mean capacity of `selected`, with N_TS = |selected|.
inline double equal_power_rate(const ChannelTensor& h, const AntennaSet& selected, double rho) {
  const CapacityParams params{rho, h.n_r(), static_cast<Index>(selected.size())};
  return mean_capacity_over_subcarriers(h, selected, PowerAllocation::equal(h.n_r()), params);
}

// ZF water-filled rate with budget rho * N_R / N_TS, or nothing when the
// selection cannot zero-force its users.
inline std::optional<double> waterfilled_rate(const ChannelTensor& h, const AntennaSet& selected, double rho) {
  const CapacityParams params{rho, h.n_r(), static_cast<Index>(selected.size())};
  if (params.n_ts < params.n_r) return std::nullopt;
  try {
    return rate_after_waterfilling(h, selected, params, waterfilling_budget(params));
  } catch (const Infeasible&) {
    return std::nullopt;
  }
}

// Fills both rate fields from `selected` on channel h.
inline SelectionOutcome evaluate_selection(const ChannelTensor& h, AntennaSet selected, double rho,
                                           std::string tag) {
  std::sort(selected.begin(), selected.end());
  SelectionOutcome out;
  out.rate_equal_power = equal_power_rate(h, selected, rho);
  out.rate_waterfilled = waterfilled_rate(h, selected, rho);
  out.selected = std::move(selected);
  out.algorithm_tag = std::move(tag);
  return out;
}

inline void check_budget(const ChannelTensor& h, Index n_ts) {
  require(n_ts >= 1 && n_ts <= h.n_t(), "selection: n_ts must lie in [1, N_T]");
}

// Runs the RPN in place from the net's current marking.
inline SelectionOutcome run_rpn(rpn::RpnNet& net, const ChannelTensor& h, double rho, std::uint64_t seed,
                                Index max_passes = 50) {
  const auto report = rpn::run_to_convergence(net, h, rho, seed, max_passes);
  SelectionOutcome out = evaluate_selection(h, net.tokened_places(), rho, "rpn");
  out.passes_used = report.passes_used;
  out.transitions_fired = report.transitions_fired;
  out.converged = report.converged;
  return out;
}

// n_ts tokens on uniformly random places, then RPN to convergence.
inline SelectionOutcome select_rpn(const ChannelTensor& h, double rho, Index n_ts, const rpn::RpnNet& topology,
                                   std::uint64_t seed, Index max_passes = 50) {
  check_budget(h, n_ts);
  require(topology.num_places() == h.n_t(), "select_rpn: topology size != N_T");
  rpn::RpnNet net = topology;
  net.set_marking(random_subset(h.n_t(), n_ts, derive_seed(seed, 0)));
  return run_rpn(net, h, rho, derive_seed(seed, 1), max_passes);
}

struct ParallelRpnOutcome {
  SelectionOutcome best;
  double average_rate = 0.0;              // mean equal-power rate over instances
  std::optional<double> average_waterfilled;  // mean over instances when all are feasible
  std::vector<SelectionOutcome> all;
};

// One independent run per seed; best = largest equal-power rate (first wins
// ties).
inline ParallelRpnOutcome select_rpn_parallel(const ChannelTensor& h, double rho, Index n_ts,
                                              const rpn::RpnNet& topology, const std::vector<std::uint64_t>& seeds,
                                              Index max_passes = 50) {
  require(!seeds.empty(), "select_rpn_parallel: need at least one instance");
  ParallelRpnOutcome out;
  double wf_sum = 0.0;
  bool wf_all = true;
  for (std::uint64_t s : seeds) {
    out.all.push_back(select_rpn(h, rho, n_ts, topology, s, max_passes));
    const auto& run = out.all.back();
    out.average_rate += run.rate_equal_power;
    if (run.rate_waterfilled)
      wf_sum += *run.rate_waterfilled;
    else
      wf_all = false;
  }
  const double n = static_cast<double>(seeds.size());
  out.average_rate /= n;
  if (wf_all) out.average_waterfilled = wf_sum / n;
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.all.size(); ++i)
    if (out.all[i].rate_equal_power > out.all[best].rate_equal_power) best = i;
  out.best = out.all[best];
  out.best.algorithm_tag = "rpn_best";
  return out;
}

inline std::vector<std::uint64_t> instance_seeds(std::uint64_t seed, Index n_instances) {
  require(n_instances >= 1, "n_instances must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (Index i = 0; i < n_instances; ++i) seeds.push_back(derive_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
  return seeds;
}

inline ParallelRpnOutcome select_rpn_parallel(const ChannelTensor& h, double rho, Index n_ts,
                                              const rpn::RpnNet& topology, Index n_instances, std::uint64_t seed,
                                              Index max_passes = 50) {
  return select_rpn_parallel(h, rho, n_ts, topology, instance_seeds(seed, n_instances), max_passes);
}

enum class GreedyScaling {
  kCurrentSize,  // N_TS in the objective = size of the candidate set
  kFinalSize,    // N_TS fixed to the target n_ts throughout
};

// Grows the set from empty, each step adding the antenna with the largest
// objective; ties go to the smallest index.
inline SelectionOutcome select_greedy(const ChannelTensor& h, double rho, Index n_ts,
                                      GreedyScaling scaling = GreedyScaling::kCurrentSize) {
  check_budget(h, n_ts);
  const auto p = PowerAllocation::equal(h.n_r());
  AntennaSet chosen;
  std::vector<bool> used(static_cast<std::size_t>(h.n_t()), false);
  Index evaluations = 0;
  for (Index step = 0; step < n_ts; ++step) {
    const Index size = step + 1;
    const double scale = rho * static_cast<double>(h.n_r()) /
                         static_cast<double>(scaling == GreedyScaling::kCurrentSize ? size : n_ts);
    Index best = -1;
    double best_value = -1.0;
    AntennaSet candidate = chosen;
    candidate.push_back(0);
    for (Index t = 0; t < h.n_t(); ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      candidate.back() = t;
      const double value = mean_log_det_rate(h, candidate, p, scale);
      ++evaluations;
      if (value > best_value) {
        best_value = value;
        best = t;
      }
    }
    chosen.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
  }
  SelectionOutcome out = evaluate_selection(h, chosen, rho, "greedy");
  out.evaluations = evaluations;
  return out;
}

inline SelectionOutcome select_random(const ChannelTensor& h, double rho, Index n_ts, std::uint64_t seed) {
  check_budget(h, n_ts);
  SelectionOutcome out = evaluate_selection(h, random_subset(h.n_t(), n_ts, seed), rho, "random");
  out.evaluations = 1;
  return out;
}

inline constexpr double kExhaustiveLimit = 1e6;

inline double binomial(Index n, Index k) {
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// True optimum of the equal-power objective by enumeration in lexicographic
// order (first subset wins ties).
inline SelectionOutcome select_exhaustive(const ChannelTensor& h, double rho, Index n_ts) {
  check_budget(h, n_ts);
  require(binomial(h.n_t(), n_ts) <= kExhaustiveLimit, "select_exhaustive: more than 1e6 subsets");
  AntennaSet subset(static_cast<std::size_t>(n_ts));
  std::iota(subset.begin(), subset.end(), Index{0});
  AntennaSet best_set;
  double best = -1.0;
  Index evaluations = 0;
  for (;;) {
    const double value = equal_power_rate(h, subset, rho);
    ++evaluations;
    if (value > best) {
      best = value;
      best_set = subset;
    }
    // Next combination.
    Index i = n_ts - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == h.n_t() - n_ts + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n_ts; ++j)
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
  }
  SelectionOutcome out = evaluate_selection(h, best_set, rho, "exhaustive");
  out.evaluations = evaluations;
  return out;
}

}  // namespace revcomm
