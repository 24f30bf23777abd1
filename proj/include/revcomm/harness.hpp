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

// Experiment configuration, sweeps and result persistence.
//
// Every sweep is a list of independent jobs keyed by a realization seed
// derived from the master seed. A row can be rebuilt from its config and
// that seed alone, e.g. fig3_realization(config, n_users, seed).

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "revcomm/channel_io.hpp"
#include "revcomm/erasure.hpp"
#include "revcomm/lattice_scene.hpp"
#include "revcomm/selection.hpp"

namespace revcomm {

inline constexpr const char* kVersion = "0.1.0";

// Config ---------------------------------------------------------------------

enum class Experiment { kFig3Sweep, kFig4Robustness, kRpnVsOracle, kTrmRefocus, kErasureSweep };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kFig3Sweep: return "fig3_sweep";
    case Experiment::kFig4Robustness: return "fig4_robustness";
    case Experiment::kRpnVsOracle: return "rpn_vs_oracle";
    case Experiment::kTrmRefocus: return "trm_refocus";
    default: return "erasure_sweep";
  }
}

inline Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::kFig3Sweep, Experiment::kFig4Robustness, Experiment::kRpnVsOracle,
                 Experiment::kTrmRefocus, Experiment::kErasureSweep})
    if (to_string(e) == s) return e;
  throw InvalidInput("unknown experiment '" + s + "'");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::kFig3Sweep;
  std::uint64_t seed = 1;
  Index threads = 0;  // 0: one per hardware thread

  // Channel and selection.
  SceneConfig scene = [] {
    SceneConfig c;
    c.num_subcarriers = 100;
    return c;
  }();
  double snr_db = -5.0;
  Index n_ts = 16;
  Index n_instances = 5;
  Index max_passes = 50;
  Index topology_rows = 4;
  Index topology_cols = 16;
  Index realizations = 10;
  std::vector<Index> user_counts{4, 8, 12, 16};

  // Robustness sweep.
  Index n_users = 12;
  std::vector<double> csi_variances{0.0, 0.05};
  std::vector<double> subcarrier_fractions{1.0, 0.1};

  // Exhaustive comparison.
  std::vector<Index> oracle_antennas{8, 12};
  Index oracle_n_ts = 4;
  Index oracle_users = 3;
  Index oracle_instances = 100;  // split evenly over oracle_antennas
  Index oracle_subcarriers = 16;

  // Lattice experiments.
  lattice::LatticeScene lattice;
  std::vector<double> backscatter_densities{0.0, 0.05, 0.1, 0.2};
  std::vector<int> backscatter_bits{1, 2, 4, 8};
  std::vector<Index> backscatter_waits{25, 50, 100, 200};

  // Erasure grid.
  std::vector<std::uint64_t> erasure_k{2, 4, 8, 16, 32, 64};
  std::vector<std::uint64_t> erasure_m{1, 2, 4, 8, 12, 16};

  double rho() const { return db_to_linear(snr_db); }
};

inline void validate(const ExperimentConfig& c) {
  require(c.threads >= 0, "config: threads must be >= 0");
  require(c.realizations >= 1, "config: realizations must be >= 1");
  require(c.n_instances >= 1 && c.max_passes >= 1, "config: n_instances and max_passes must be >= 1");
  require(c.topology_rows * c.topology_cols == c.scene.num_antennas,
          "config: topology rows * cols must equal num_antennas");
  require(c.n_ts >= 1 && c.n_ts <= c.scene.num_antennas, "config: n_ts must lie in [1, num_antennas]");
  require(!c.user_counts.empty(), "config: empty user_counts");
  for (Index u : c.user_counts) require(u >= 1, "config: user counts must be >= 1");
  require(c.n_users >= 1, "config: n_users must be >= 1");
  require(!c.csi_variances.empty() && !c.subcarrier_fractions.empty(), "config: empty robustness axes");
  for (double v : c.csi_variances) require(v >= 0.0, "config: CSI variances must be >= 0");
  for (double f : c.subcarrier_fractions) require(f > 0.0 && f <= 1.0, "config: subcarrier fractions must lie in (0, 1]");
  require(!c.oracle_antennas.empty(), "config: empty oracle_antennas");
  for (Index n : c.oracle_antennas) {
    require(n >= 4 && n % 2 == 0, "config: oracle antenna counts must be even and >= 4");
    require(c.oracle_n_ts <= n, "config: oracle_n_ts exceeds an oracle antenna count");
    require(binomial(n, c.oracle_n_ts) <= kExhaustiveLimit, "config: oracle instance exceeds the exhaustive bound");
  }
  require(c.oracle_n_ts >= 1 && c.oracle_users >= 1 && c.oracle_instances >= 1 && c.oracle_subcarriers >= 1,
          "config: oracle sizes must be >= 1");
  lattice::validate(c.lattice);
  for (double d : c.backscatter_densities) require(d >= 0.0 && d < 1.0, "config: densities must lie in [0, 1)");
  for (int m : c.backscatter_bits) require(m >= 1, "config: adc bits must be >= 1");
  for (Index k : c.backscatter_waits) require(k >= 0, "config: waits must be >= 0");
  require(!c.erasure_k.empty() && !c.erasure_m.empty(), "config: empty erasure grid");
}

inline void to_json(nlohmann::json& j, const SceneConfig& c) {
  j = {{"num_antennas", c.num_antennas},
       {"num_scatterers", c.num_scatterers},
       {"area", c.area},
       {"obstacle", c.obstacle ? nlohmann::json(*c.obstacle) : nlohmann::json(nullptr)},
       {"carrier_frequency", c.carrier_frequency},
       {"bandwidth", c.bandwidth},
       {"num_subcarriers", c.num_subcarriers}};
}

namespace detail {

// Copies present keys into fields and rejects unknown ones.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), where_ + ": expected a JSON object");
  }
  template <typename T>
  void operator()(const char* key, T& field) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(where_ + "." + key + ": " + e.what());
    }
  }
  void mark(const char* key) { seen_.emplace_back(key); }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      require(std::find(seen_.begin(), seen_.end(), k) != seen_.end(), where_ + ": unknown key '" + k + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace detail

inline void from_json(const nlohmann::json& j, SceneConfig& c) {
  detail::FieldReader get(j, "scene");
  get("num_antennas", c.num_antennas);
  get("num_scatterers", c.num_scatterers);
  get("area", c.area);
  get.mark("obstacle");
  if (j.contains("obstacle"))
    c.obstacle = j.at("obstacle").is_null() ? std::nullopt : std::optional(j.at("obstacle").get<Rect>());
  get("carrier_frequency", c.carrier_frequency);
  get("bandwidth", c.bandwidth);
  get("num_subcarriers", c.num_subcarriers);
  get.finish();
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"experiment", to_string(c.experiment)},
       {"seed", c.seed},
       {"threads", c.threads},
       {"scene", c.scene},
       {"snr_db", c.snr_db},
       {"n_ts", c.n_ts},
       {"n_instances", c.n_instances},
       {"max_passes", c.max_passes},
       {"topology", {{"rows", c.topology_rows}, {"cols", c.topology_cols}}},
       {"realizations", c.realizations},
       {"user_counts", c.user_counts},
       {"n_users", c.n_users},
       {"csi_variances", c.csi_variances},
       {"subcarrier_fractions", c.subcarrier_fractions},
       {"oracle",
        {{"antennas", c.oracle_antennas},
         {"n_ts", c.oracle_n_ts},
         {"users", c.oracle_users},
         {"instances", c.oracle_instances},
         {"subcarriers", c.oracle_subcarriers}}},
       {"lattice", c.lattice},
       {"backscatter",
        {{"densities", c.backscatter_densities}, {"adc_bits", c.backscatter_bits}, {"waits", c.backscatter_waits}}},
       {"erasure", {{"k", c.erasure_k}, {"m", c.erasure_m}}}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  detail::FieldReader get(j, "config");
  std::string experiment = to_string(c.experiment);
  get("experiment", experiment);
  c.experiment = experiment_from_string(experiment);
  get("seed", c.seed);
  get("threads", c.threads);
  get("scene", c.scene);
  get("snr_db", c.snr_db);
  get("n_ts", c.n_ts);
  get("n_instances", c.n_instances);
  get("max_passes", c.max_passes);
  nlohmann::json topology = nlohmann::json::object();
  get("topology", topology);
  {
    detail::FieldReader t(topology, "topology");
    t("rows", c.topology_rows);
    t("cols", c.topology_cols);
    t.finish();
  }
  get("realizations", c.realizations);
  get("user_counts", c.user_counts);
  get("n_users", c.n_users);
  get("csi_variances", c.csi_variances);
  get("subcarrier_fractions", c.subcarrier_fractions);
  nlohmann::json oracle = nlohmann::json::object();
  get("oracle", oracle);
  {
    detail::FieldReader o(oracle, "oracle");
    o("antennas", c.oracle_antennas);
    o("n_ts", c.oracle_n_ts);
    o("users", c.oracle_users);
    o("instances", c.oracle_instances);
    o("subcarriers", c.oracle_subcarriers);
    o.finish();
  }
  if (j.contains("lattice")) {
    const nlohmann::json known = lattice::LatticeScene{};
    for (const auto& [k, v] : j.at("lattice").items())
      require(known.contains(k), "lattice: unknown key '" + k + "'");
  }
  get("lattice", c.lattice);
  nlohmann::json back = nlohmann::json::object();
  get("backscatter", back);
  {
    detail::FieldReader b(back, "backscatter");
    b("densities", c.backscatter_densities);
    b("adc_bits", c.backscatter_bits);
    b("waits", c.backscatter_waits);
    b.finish();
  }
  nlohmann::json era = nlohmann::json::object();
  get("erasure", era);
  {
    detail::FieldReader e(era, "erasure");
    e("k", c.erasure_k);
    e("m", c.erasure_m);
    e.finish();
  }
  get.finish();
  validate(c);
}

// FNV-1a over the canonical (sorted-key) JSON dump of the full config.
// FNV-1a over the sorted-key dump. The worker count is left out: it never
// changes a row.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  nlohmann::json j = c;
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config '" + path.string() + "': " + e.what());
  }
  return j.get<ExperimentConfig>();
}

// Jobs -----------------------------------------------------------------------

// Runs fn(i) for i in [0, n) on up to `threads` workers; results keep job
// order. The first exception is rethrown after all workers stop.
template <typename F>
auto parallel_map(Index n, Index threads, F fn) -> std::vector<decltype(fn(Index{}))> {
  using R = decltype(fn(Index{}));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (Index i; (i = next++) < n;) {
      try {
        slots[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  Index count = threads > 0 ? threads : static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
  count = std::clamp<Index>(count, 1, std::max<Index>(n, 1));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::uint64_t realization_seed(const ExperimentConfig& c, Index r) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(r));
}

// CSV ------------------------------------------------------------------------

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string format_set(const AntennaSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + std::to_string(s[i]);
  return out;
}

inline AntennaSet parse_set(const std::string& text) {
  AntennaSet s;
  std::istringstream in(text);
  for (Index v; in >> v;) s.push_back(v);
  return s;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string header_line() const { return join(columns); }
  std::string row_line(std::size_t i) const { return join(rows[i]); }

  static std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      require(cells[i].find_first_of(",\n\"") == std::string::npos, "csv: cell needs quoting");
      out += (i ? "," : "") + cells[i];
    }
    return out;
  }

  void write(std::ostream& out) const {
    out << header_line() << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) out << row_line(i) << '\n';
  }
};

// Selection outcome JSON -----------------------------------------------------

inline void to_json(nlohmann::json& j, const SelectionOutcome& o) {
  j = {{"selected", o.selected},
       {"rate_equal_power", o.rate_equal_power},
       {"rate_waterfilled", o.rate_waterfilled ? nlohmann::json(*o.rate_waterfilled) : nlohmann::json(nullptr)},
       {"passes_used", o.passes_used},
       {"transitions_fired", o.transitions_fired},
       {"converged", o.converged},
       {"evaluations", o.evaluations},
       {"algorithm_tag", o.algorithm_tag}};
}

inline void from_json(const nlohmann::json& j, SelectionOutcome& o) {
  o.selected = j.at("selected").get<AntennaSet>();
  o.rate_equal_power = j.at("rate_equal_power").get<double>();
  o.rate_waterfilled = j.at("rate_waterfilled").is_null() ? std::nullopt
                                                          : std::optional(j.at("rate_waterfilled").get<double>());
  o.passes_used = j.at("passes_used").get<Index>();
  o.transitions_fired = j.at("transitions_fired").get<Index>();
  o.converged = j.at("converged").get<bool>();
  o.evaluations = j.value("evaluations", Index{0});
  o.algorithm_tag = j.at("algorithm_tag").get<std::string>();
}

// Rate rows shared by the selection experiments --------------------------------

struct RateRow {
  std::string algorithm;
  double rate_equal_power = 0.0;
  std::optional<double> rate_waterfilled;
  Index passes_used = 0;
  Index transitions_fired = 0;
  bool converged = true;
  AntennaSet selected;  // empty for averaged rows
};

inline RateRow rate_row(const SelectionOutcome& o, std::string algorithm) {
  return {std::move(algorithm), o.rate_equal_power, o.rate_waterfilled, o.passes_used,
          o.transitions_fired,  o.converged,        o.selected};
}

inline RateRow average_row(const ParallelRpnOutcome& p) {
  RateRow r{"rpn_average", p.average_rate, p.average_waterfilled, 0, 0, true, {}};
  for (const auto& o : p.all) {
    r.passes_used = std::max(r.passes_used, o.passes_used);
    r.transitions_fired += o.transitions_fired;
    r.converged = r.converged && o.converged;
  }
  return r;
}

inline rpn::RpnNet topology(const ExperimentConfig& c) {
  return rpn::build_toroidal_net(c.topology_rows, c.topology_cols);
}

// Channel of one scene realization with `users` users.
inline ChannelTensor realization_channel(const SceneConfig& base, Index users, std::uint64_t scene_seed) {
  SceneConfig cfg = base;
  cfg.num_users = users;
  return synthesize_channel(generate_scene(cfg, scene_seed));
}

// Fig. 3 sweep -----------------------------------------------------------------

struct Fig3Row {
  std::uint64_t seed = 0;
  Index realization = 0;
  Index n_users = 0;
  RateRow rate;
};

// Greedy, random, RPN best and RPN average on one scene.
inline std::vector<Fig3Row> fig3_realization(const ExperimentConfig& c, Index n_users, std::uint64_t seed,
                                             Index realization = 0) {
  const ChannelTensor h = realization_channel(c.scene, n_users, derive_seed(seed, static_cast<std::uint64_t>(n_users)));
  const double rho = c.rho();
  const std::uint64_t alg_seed = derive_seed(seed, 0x10000 + static_cast<std::uint64_t>(n_users));
  const auto greedy = select_greedy(h, rho, c.n_ts);
  const auto random = select_random(h, rho, c.n_ts, derive_seed(alg_seed, 1));
  const auto par = select_rpn_parallel(h, rho, c.n_ts, topology(c), c.n_instances, derive_seed(alg_seed, 2), c.max_passes);
  std::vector<Fig3Row> rows;
  for (auto r : {rate_row(greedy, "greedy"), rate_row(random, "random"), rate_row(par.best, "rpn_best"), average_row(par)})
    rows.push_back({seed, realization, n_users, std::move(r)});
  return rows;
}

inline std::vector<Fig3Row> run_fig3_sweep(const ExperimentConfig& c) {
  validate(c);
  const Index per = c.realizations;
  const auto jobs = parallel_map(static_cast<Index>(c.user_counts.size()) * per, c.threads, [&](Index i) {
    const Index users = c.user_counts[static_cast<std::size_t>(i / per)];
    return fig3_realization(c, users, realization_seed(c, i % per), i % per);
  });
  std::vector<Fig3Row> rows;
  for (const auto& j : jobs) rows.insert(rows.end(), j.begin(), j.end());
  return rows;
}

inline CsvTable fig3_table(const std::vector<Fig3Row>& rows, std::uint64_t hash) {
  CsvTable t{{"config_hash", "seed", "realization", "n_users", "algorithm", "rate_equal_power", "rate_waterfilled",
              "passes_used", "transitions_fired", "converged", "selected"},
             {}};
  for (const auto& r : rows)
    t.rows.push_back({hex64(hash), std::to_string(r.seed), std::to_string(r.realization), std::to_string(r.n_users),
                      r.rate.algorithm, format_double(r.rate.rate_equal_power), format_optional(r.rate.rate_waterfilled),
                      std::to_string(r.rate.passes_used), std::to_string(r.rate.transitions_fired),
                      r.rate.converged ? "1" : "0", format_set(r.rate.selected)});
  return t;
}

// Fig. 4 robustness ----------------------------------------------------------------

struct Fig4Row {
  std::uint64_t seed = 0;
  Index realization = 0;
  Index n_users = 0;
  double csi_variance = 0.0;
  double subcarrier_fraction = 1.0;
  Index subcarriers_used = 0;
  double overlap = 1.0;  // |selected ∩ clean selection| / n_ts
  RateRow rate;          // evaluated on the true channel
};

// Selection on perturbed and subsampled CSI, scored on the true channel,
// for every (variance, fraction) pair.
inline std::vector<Fig4Row> fig4_realization(const ExperimentConfig& c, std::uint64_t seed, Index realization = 0) {
  const ChannelTensor truth = realization_channel(c.scene, c.n_users, derive_seed(seed, static_cast<std::uint64_t>(c.n_users)));
  const double rho = c.rho();
  const std::uint64_t alg_seed = derive_seed(seed, 0x10000 + static_cast<std::uint64_t>(c.n_users));
  const auto topo = topology(c);

  struct Picked {
    SelectionOutcome outcome;
    std::string algorithm;
  };
  auto select_on = [&](const ChannelTensor& csi) {
    const auto par = select_rpn_parallel(csi, rho, c.n_ts, topo, c.n_instances, derive_seed(alg_seed, 2), c.max_passes);
    return std::vector<Picked>{{par.best, "rpn_best"}, {select_greedy(csi, rho, c.n_ts), "greedy"}};
  };
  const auto clean = select_on(truth);

  std::vector<Fig4Row> rows;
  std::uint64_t cell = 0;
  for (double var : c.csi_variances)
    for (double frac : c.subcarrier_fractions) {
      ++cell;
      const Index count = std::max<Index>(1, static_cast<Index>(std::llround(frac * static_cast<double>(truth.n_subcarriers()))));
      const bool untouched = var == 0.0 && count == truth.n_subcarriers();
      std::vector<Picked> picked;
      if (untouched) {
        picked = clean;
      } else {
        ChannelTensor csi = count == truth.n_subcarriers() ? truth : subsample_subcarriers(truth, count, derive_seed(seed, 0x20000 + cell));
        csi = perturb_csi(csi, var, derive_seed(seed, 0x30000 + cell));
        picked = select_on(csi);
      }
      for (std::size_t a = 0; a < picked.size(); ++a) {
        const auto scored = evaluate_selection(truth, picked[a].outcome.selected, rho, picked[a].algorithm);
        RateRow rr = rate_row(scored, picked[a].algorithm);
        rr.passes_used = picked[a].outcome.passes_used;
        rr.transitions_fired = picked[a].outcome.transitions_fired;
        rr.converged = picked[a].outcome.converged;
        AntennaSet common;
        std::set_intersection(scored.selected.begin(), scored.selected.end(), clean[a].outcome.selected.begin(),
                              clean[a].outcome.selected.end(), std::back_inserter(common));
        rows.push_back({seed, realization, c.n_users, var, frac, count,
                        static_cast<double>(common.size()) / static_cast<double>(c.n_ts), std::move(rr)});
      }
    }
  return rows;
}

inline std::vector<Fig4Row> run_fig4_robustness(const ExperimentConfig& c) {
  validate(c);
  const auto jobs = parallel_map(c.realizations, c.threads, [&](Index r) { return fig4_realization(c, realization_seed(c, r), r); });
  std::vector<Fig4Row> rows;
  for (const auto& j : jobs) rows.insert(rows.end(), j.begin(), j.end());
  return rows;
}

inline CsvTable fig4_table(const std::vector<Fig4Row>& rows, std::uint64_t hash) {
  CsvTable t{{"config_hash", "seed", "realization", "n_users", "csi_variance", "subcarrier_fraction", "subcarriers_used",
              "algorithm", "rate_equal_power", "rate_waterfilled", "overlap_with_clean", "passes_used",
              "transitions_fired", "converged", "selected"},
             {}};
  for (const auto& r : rows)
    t.rows.push_back({hex64(hash), std::to_string(r.seed), std::to_string(r.realization), std::to_string(r.n_users),
                      format_double(r.csi_variance), format_double(r.subcarrier_fraction),
                      std::to_string(r.subcarriers_used), r.rate.algorithm, format_double(r.rate.rate_equal_power),
                      format_optional(r.rate.rate_waterfilled), format_double(r.overlap),
                      std::to_string(r.rate.passes_used), std::to_string(r.rate.transitions_fired),
                      r.rate.converged ? "1" : "0", format_set(r.rate.selected)});
  return t;
}

// Exhaustive comparison -------------------------------------------------------------

struct OracleRow {
  std::uint64_t seed = 0;
  Index instance = 0;
  Index n_antennas = 0;
  double optimum = 0.0;
  RateRow rate;
  double gap() const { return optimum - rate.rate_equal_power; }
};

// One small scene: exhaustive optimum plus greedy, random and RPN rows.
inline std::vector<OracleRow> oracle_instance(const ExperimentConfig& c, Index n_antennas, std::uint64_t seed,
                                              Index instance = 0) {
  SceneConfig sc = c.scene;
  sc.num_antennas = n_antennas;
  sc.num_subcarriers = c.oracle_subcarriers;
  const ChannelTensor h = realization_channel(sc, c.oracle_users, derive_seed(seed, 1));
  const double rho = c.rho();
  const auto topo = rpn::build_toroidal_net(2, n_antennas / 2);
  const auto best = select_exhaustive(h, rho, c.oracle_n_ts);
  const auto greedy = select_greedy(h, rho, c.oracle_n_ts);
  const auto random = select_random(h, rho, c.oracle_n_ts, derive_seed(seed, 2));
  const auto par = select_rpn_parallel(h, rho, c.oracle_n_ts, topo, c.n_instances, derive_seed(seed, 3), c.max_passes);
  std::vector<OracleRow> rows;
  for (auto r : {rate_row(best, "exhaustive"), rate_row(greedy, "greedy"), rate_row(random, "random"),
                 rate_row(par.best, "rpn_best"), average_row(par)})
    rows.push_back({seed, instance, n_antennas, best.rate_equal_power, std::move(r)});
  return rows;
}

inline std::vector<OracleRow> run_rpn_vs_oracle(const ExperimentConfig& c) {
  validate(c);
  const auto kinds = static_cast<Index>(c.oracle_antennas.size());
  const auto jobs = parallel_map(c.oracle_instances, c.threads, [&](Index i) {
    return oracle_instance(c, c.oracle_antennas[static_cast<std::size_t>(i % kinds)], realization_seed(c, i), i);
  });
  std::vector<OracleRow> rows;
  for (const auto& j : jobs) rows.insert(rows.end(), j.begin(), j.end());
  return rows;
}

inline CsvTable oracle_table(const std::vector<OracleRow>& rows, std::uint64_t hash) {
  CsvTable t{{"config_hash", "seed", "instance", "n_antennas", "algorithm", "rate_equal_power", "rate_waterfilled",
              "optimum", "gap", "passes_used", "transitions_fired", "converged", "selected"},
             {}};
  for (const auto& r : rows)
    t.rows.push_back({hex64(hash), std::to_string(r.seed), std::to_string(r.instance), std::to_string(r.n_antennas),
                      r.rate.algorithm, format_double(r.rate.rate_equal_power), format_optional(r.rate.rate_waterfilled),
                      format_double(r.optimum), format_double(r.gap()), std::to_string(r.rate.passes_used),
                      std::to_string(r.rate.transitions_fired), r.rate.converged ? "1" : "0",
                      format_set(r.rate.selected)});
  return t;
}

// Mirror experiments -----------------------------------------------------------------

struct TrmRow {
  std::uint64_t seed = 0;
  Index realization = 0;
  lattice::TrmComparison result;
  bool aperture_monotone() const { return result.metric_full >= result.metric_one_edge; }
};

inline TrmRow trm_realization(const ExperimentConfig& c, std::uint64_t seed, Index realization = 0) {
  return {seed, realization, lattice::run_trm_comparison(c.lattice, seed)};
}

inline std::vector<TrmRow> run_trm_refocus(const ExperimentConfig& c) {
  validate(c);
  return parallel_map(c.realizations, c.threads, [&](Index r) { return trm_realization(c, realization_seed(c, r), r); });
}

inline CsvTable trm_table(const std::vector<TrmRow>& rows, std::uint64_t hash) {
  CsvTable t{{"config_hash", "seed", "realization", "emitted", "absorbed", "metric_full", "metric_one_edge",
              "metric_one_trit", "metric_zero", "metric_background", "focus_full", "control_full", "focus_reference",
              "control_reference", "aperture_monotone"},
             {}};
  for (const auto& r : rows) {
    const auto& x = r.result;
    t.rows.push_back({hex64(hash), std::to_string(r.seed), std::to_string(r.realization), std::to_string(x.emitted),
                      std::to_string(x.absorbed), format_double(x.metric_full), format_double(x.metric_one_edge),
                      format_double(x.metric_one_trit), format_double(x.metric_zero),
                      format_double(x.metric_background), format_double(x.full.source), format_double(x.full.control),
                      format_double(x.reference.source), format_double(x.reference.control),
                      r.aperture_monotone() ? "1" : "0"});
  }
  return t;
}

struct BackscatterRow {
  std::uint64_t seed = 0;
  Index realization = 0;
  double density = 0.0;
  int adc_bits = 1;
  Index wait = 0;
  double score = 0.0;
};

inline std::vector<BackscatterRow> backscatter_realization(const ExperimentConfig& c, std::uint64_t seed,
                                                           Index realization = 0) {
  std::vector<BackscatterRow> rows;
  for (double d : c.backscatter_densities)
    for (int m : c.backscatter_bits)
      for (Index k : c.backscatter_waits)
        rows.push_back({seed, realization, d, m, k, lattice::backscatter_loss_experiment(c.lattice, d, m, k, seed)});
  return rows;
}

inline std::vector<BackscatterRow> run_backscatter(const ExperimentConfig& c) {
  validate(c);
  const auto jobs = parallel_map(c.realizations, c.threads,
                                 [&](Index r) { return backscatter_realization(c, realization_seed(c, r), r); });
  std::vector<BackscatterRow> rows;
  for (const auto& j : jobs) rows.insert(rows.end(), j.begin(), j.end());
  return rows;
}

inline CsvTable backscatter_table(const std::vector<BackscatterRow>& rows, std::uint64_t hash) {
  CsvTable t{{"config_hash", "seed", "realization", "scatterer_density", "adc_bits", "wait", "score"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({hex64(hash), std::to_string(r.seed), std::to_string(r.realization), format_double(r.density),
                      std::to_string(r.adc_bits), std::to_string(r.wait), format_double(r.score)});
  return t;
}

inline CsvTable erasure_table(const std::vector<erasure::LedgerRow>& rows, std::uint64_t hash, std::uint64_t seed) {
  CsvTable t{{"config_hash", "seed", "variant", "k", "m", "erased_bits", "gate_count"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({hex64(hash), std::to_string(seed), erasure::to_string(r.spec.variant),
                      std::to_string(r.spec.waiting_samples), std::to_string(r.spec.adc_bits),
                      std::to_string(r.ledger.erased_bits), std::to_string(r.ledger.gate_count)});
  return t;
}

// Persistence --------------------------------------------------------------------

inline nlohmann::json run_metadata(const ExperimentConfig& c, const std::string& command,
                                   const std::vector<std::pair<std::string, const CsvTable*>>& files) {
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& [name, table] : files) outputs[name] = {{"columns", table->columns}, {"rows", table->rows.size()}};
  return {{"command", command},
          {"experiment", to_string(c.experiment)},
          {"config", c},
          {"config_hash", hex64(config_hash(c))},
          {"seed", c.seed},
          {"outputs", outputs},
          {"versions",
           {{"revcomm", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}}}};
}

// Refuses to touch an existing file.
inline void write_new_file(const std::filesystem::path& path, const std::string& content) {
  require(!std::filesystem::exists(path), "refusing to overwrite existing '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot create '" + path.string() + "'");
  out << content;
  out.close();
  require(static_cast<bool>(out), "failed writing '" + path.string() + "'");
}

// Writes every table plus meta.json into `dir`; nothing is written if any
// target already exists.
inline void persist(const std::filesystem::path& dir, const ExperimentConfig& c, const std::string& command,
                    const std::vector<std::pair<std::string, const CsvTable*>>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : files)
    require(!std::filesystem::exists(dir / name), "refusing to overwrite existing '" + (dir / name).string() + "'");
  require(!std::filesystem::exists(dir / "meta.json"), "refusing to overwrite existing '" + (dir / "meta.json").string() + "'");
  for (const auto& [name, table] : files) {
    std::ostringstream s;
    table->write(s);
    write_new_file(dir / name, s.str());
  }
  write_new_file(dir / "meta.json", run_metadata(c, command, files).dump(2) + "\n");
}

}  // namespace revcomm
