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

// Exit-gate suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Thresholds are the constants below.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>

#include "revcomm/harness.hpp"

using namespace revcomm;

namespace {

// Thresholds.
constexpr int kCapacityInstances = 1000;
constexpr double kCapacityTolerance = 1e-9;
constexpr double kClosedFormTolerance = 1e-12;
constexpr double kCapacityBudget = 10.0;

constexpr Index kInvariantTransitions = 10000;
constexpr double kInvariantBudget = 30.0;

constexpr int kConvergenceScenes = 50;
constexpr double kConvergedFraction = 0.95;
constexpr Index kMedianPasses = 5;
constexpr double kConvergenceBudget = 300.0;

constexpr Index kOracleInstances = 100;
constexpr double kOptimumFraction = 0.90;
constexpr double kRandomMarginSe = 3.0;
constexpr double kOracleBudget = 300.0;

constexpr double kFig3Budget = 900.0;

constexpr double kFig4Fraction = 0.1;
constexpr double kFig4Variance = 0.05;
constexpr double kFig4Tolerance = 0.10;

constexpr int kLatticeCount = 100;
constexpr Index kLatticeSteps = 1000;
constexpr double kLatticeBudget = 120.0;

constexpr Index kTrmRealizations = 20;
constexpr double kFocusOverBackground = 5.0;
constexpr double kOneTritFraction = 0.5;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a criterion; an exception counts as a failure.
void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

Complex gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  return {n(rng), n(rng)};
}

ChannelTensor random_tensor(Index n_t, Index n_r, Index n_s, std::uint64_t seed) {
  ChannelTensor h(n_t, n_r, n_s);
  Rng rng(seed);
  for (auto& g : h.raw()) g = gaussian(rng);
  return h;
}

// log2 det(I + c H P H^H) through the eigenvalues of the N_R x N_R form
// c P^1/2 H^H H P^1/2.
double eigen_oracle(const ComplexMatrix& h, const std::vector<double>& p, double c) {
  const Index n = static_cast<Index>(p.size());
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) d(i, i) = std::sqrt(p[static_cast<std::size_t>(i)]);
  const ComplexMatrix form = c * (d * h.adjoint() * h * d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(form);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += std::log2(1.0 + std::max(0.0, es.eigenvalues()(i)));
  return acc;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

void capacity_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20260101);
  std::uniform_int_distribution<Index> nts(1, 16), nr(1, 8);
  std::uniform_real_distribution<double> log_rho(-2.0, 2.0), weight(0.01, 1.0);
  double worst = 0.0;
  for (int i = 0; i < kCapacityInstances; ++i) {
    const Index t = nts(rng), r = nr(rng);
    ComplexMatrix h(t, r);
    for (Index a = 0; a < t; ++a)
      for (Index b = 0; b < r; ++b) h(a, b) = gaussian(rng);
    PowerAllocation p;
    for (Index b = 0; b < r; ++b) p.weights.push_back(weight(rng));
    const CapacityParams params{std::pow(10.0, log_rho(rng)), r, t};
    worst = std::max(worst, std::abs(sum_capacity(h, p, params) - eigen_oracle(h, p.weights, params.scale())));
  }
  const double closed = sum_capacity(ComplexMatrix::Identity(2, 2), PowerAllocation{{0.5, 0.5}}, CapacityParams{1.0, 2, 2});
  const double closed_err = std::abs(closed - 2.0 * std::log2(1.5));
  const double secs = seconds_since(t0);
  report("capacity_oracle", worst <= kCapacityTolerance && closed_err <= kClosedFormTolerance && secs < kCapacityBudget,
         fmt("max |C - oracle| = %.3g over %d instances (<= %.0e); closed form error %.3g (<= %.0e); %.2f s (< %.0f s)",
             worst, kCapacityInstances, kCapacityTolerance, closed_err, kClosedFormTolerance, secs, kCapacityBudget));
}

void non_submodularity() {
  // Random search for a set S and an antenna a with C(S + a) < C(S).
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const ChannelTensor h = random_tensor(6, 2, 1, 777000 + seed);
    const AntennaSet s = random_subset(6, 2, seed);
    const double base = equal_power_rate(h, s, 0.5);
    for (Index a = 0; a < 6; ++a) {
      if (std::find(s.begin(), s.end(), a) != s.end()) continue;
      AntennaSet bigger = s;
      bigger.push_back(a);
      std::sort(bigger.begin(), bigger.end());
      const double grown = equal_power_rate(h, bigger, 0.5);
      if (grown >= base) continue;
      const std::filesystem::path dir = "acceptance_artifacts";
      std::filesystem::create_directories(dir);
      save_tensor(h, dir / "nonsubmodular_channel.rcht");
      const nlohmann::json j{{"channel", "nonsubmodular_channel.rcht"}, {"rho", 0.5},        {"set", s},
                             {"added", a},                           {"rate_before", base}, {"rate_after", grown}};
      std::ofstream(dir / "nonsubmodular.json") << j.dump(2) << '\n';
      // Reload and recheck the stored instance.
      const ChannelTensor back = load_tensor(dir / "nonsubmodular_channel.rcht");
      const bool reproduced = equal_power_rate(back, bigger, 0.5) < equal_power_rate(back, s, 0.5);
      report("non_submodularity", reproduced,
             fmt("seed %llu: adding antenna %lld to a %zu-set drops the rate %.6f -> %.6f; stored in %s",
                 static_cast<unsigned long long>(seed), static_cast<long long>(a), s.size(), base, grown,
                 (dir / "nonsubmodular.json").string().c_str()));
      return;
    }
  }
  report("non_submodularity", false, "no decreasing instance found in 10000 random draws");
}

void rpn_invariants() {
  const auto t0 = std::chrono::steady_clock::now();
  Index transitions = 0, runs = 0, bad_count = 0, bad_delta = 0, bad_reverse = 0, bad_occupancy = 0;
  for (std::uint64_t seed = 0; transitions < kInvariantTransitions; ++seed) {
    Rng rng(seed);
    const Index n_r = 2 + static_cast<Index>(seed % 5);
    const Index tokens = 4 + static_cast<Index>(seed % 29);
    const ChannelTensor h = random_tensor(64, n_r, 4, 31000 + seed);
    rpn::RpnNet net = rpn::build_toroidal_net(4, 16);
    net.set_marking(random_subset(64, tokens, seed));
    const auto initial = net.marking();
    for (Index pass = 0; pass < 50; ++pass) {
      const Index fired = rpn::step_pass(net, h, 0.3 + 0.1 * static_cast<double>(seed % 10), derive_seed(seed, pass), pass);
      const auto m = net.marking();
      if (net.token_count() != tokens) ++bad_count;
      if (std::any_of(m.begin(), m.end(), [](auto v) { return v > 1; })) ++bad_occupancy;
      if (fired == 0) break;
    }
    for (const auto& rec : net.history())
      if (!(rec.capacity_after > rec.capacity_before)) ++bad_delta;
    transitions += static_cast<Index>(net.history().size());
    net.reverse(net.history().size());
    if (net.marking() != initial) ++bad_reverse;
    ++runs;
  }
  const double secs = seconds_since(t0);
  report("rpn_invariants",
         bad_count == 0 && bad_delta == 0 && bad_reverse == 0 && bad_occupancy == 0 && secs < kInvariantBudget,
         fmt("%lld transitions in %lld runs; token-count violations %lld, occupancy violations %lld, "
             "non-positive deltas %lld, failed reversals %lld; %.1f s (< %.0f s)",
             static_cast<long long>(transitions), static_cast<long long>(runs), static_cast<long long>(bad_count),
             static_cast<long long>(bad_occupancy), static_cast<long long>(bad_delta),
             static_cast<long long>(bad_reverse), secs, kInvariantBudget));
}

void convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.scene.num_subcarriers = 300;
  const auto topo = topology(c);
  std::vector<Index> passes;
  Index converged = 0;
  for (int i = 0; i < kConvergenceScenes; ++i) {
    const std::uint64_t seed = derive_seed(4242, static_cast<std::uint64_t>(i));
    const ChannelTensor h = realization_channel(c.scene, 12, seed);
    const auto par = select_rpn_parallel(h, c.rho(), c.n_ts, topo, c.n_instances, derive_seed(seed, 1), c.max_passes);
    for (const auto& o : par.all) {
      converged += o.converged;
      passes.push_back(o.passes_used);
    }
  }
  std::sort(passes.begin(), passes.end());
  const Index median = passes[passes.size() / 2];
  const double frac = static_cast<double>(converged) / static_cast<double>(passes.size());
  const double secs = seconds_since(t0);
  report("rpn_convergence", frac >= kConvergedFraction && median <= kMedianPasses && secs < kConvergenceBudget,
         fmt("%d scenes x %lld runs (64 antennas, 12 users, 300 subcarriers, -5 dB, N_TS %lld): converged %.1f%% "
             "(>= %.0f%%), median passes %lld (<= %lld), max %lld; %.1f s (< %.0f s)",
             kConvergenceScenes, static_cast<long long>(c.n_instances), static_cast<long long>(c.n_ts), 100.0 * frac,
             100.0 * kConvergedFraction, static_cast<long long>(median), static_cast<long long>(kMedianPasses),
             static_cast<long long>(passes.back()), secs, kConvergenceBudget));
}

void selection_quality() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.oracle_antennas = {8, 10, 12};
  c.oracle_instances = kOracleInstances;
  c.threads = 1;
  const auto rows = run_rpn_vs_oracle(c);
  std::map<std::string, std::vector<double>> rate;
  Index above = 0;
  for (const auto& r : rows) {
    rate[r.rate.algorithm].push_back(r.rate.rate_equal_power);
    if ((r.rate.algorithm == "greedy" || r.rate.algorithm == "rpn_best") && r.gap() < -1e-12) ++above;
  }
  const double opt = mean(rate["exhaustive"]), best = mean(rate["rpn_best"]), rnd = mean(rate["random"]);
  std::vector<double> diff;
  for (std::size_t i = 0; i < rate["random"].size(); ++i) diff.push_back(rate["rpn_best"][i] - rate["random"][i]);
  const double se = standard_error(diff);
  const double secs = seconds_since(t0);
  report("selection_quality",
         above == 0 && best >= kOptimumFraction * opt && best - rnd >= kRandomMarginSe * se && secs < kOracleBudget,
         fmt("%lld instances (N_T 8-12, N_TS %lld): greedy/RPN above optimum %lld; mean RPN-best %.4f = %.1f%% of "
             "optimum %.4f (>= %.0f%%); RPN-best - random = %.4f, %.1f paired SE (>= %.0f); greedy %.4f; %.1f s",
             static_cast<long long>(kOracleInstances), static_cast<long long>(c.oracle_n_ts),
             static_cast<long long>(above), best, 100.0 * best / opt, opt, 100.0 * kOptimumFraction, best - rnd,
             (best - rnd) / se, kRandomMarginSe, mean(rate["greedy"]), secs));
}

void fig3_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;  // desk scale: 64 antennas, 100 subcarriers, N_TS 16, 10 realizations
  c.threads = 0;
  const auto rows = run_fig3_sweep(c);
  std::map<Index, std::map<std::string, std::vector<double>>> by;
  for (const auto& r : rows) by[r.n_users][r.rate.algorithm].push_back(r.rate.rate_equal_power);
  std::string detail = "mean(RPN-best)/mean(greedy) at users";
  double prev = -1.0;
  bool monotone = true;
  for (Index u : c.user_counts) {
    const double ratio = mean(by[u]["rpn_best"]) / mean(by[u]["greedy"]);
    monotone = monotone && ratio >= prev;
    prev = ratio;
    detail += fmt(" %lld: %.4f", static_cast<long long>(u), ratio);
  }
  const double secs = seconds_since(t0);
  detail += fmt(" (non-decreasing required; %lld realizations per point); %.1f s (< %.0f s)",
                static_cast<long long>(c.realizations), secs, kFig3Budget);
  report("fig3_trend", monotone && secs < kFig3Budget, detail);
}

void fig4_robustness() {
  ExperimentConfig c;
  c.n_users = 12;
  c.csi_variances = {0.0, kFig4Variance};
  c.subcarrier_fractions = {1.0, kFig4Fraction};
  const auto rows = run_fig4_robustness(c);
  std::vector<double> clean, noisy;
  for (const auto& r : rows) {
    if (r.rate.algorithm != "rpn_best") continue;
    if (r.csi_variance == 0.0 && r.subcarrier_fraction == 1.0) clean.push_back(r.rate.rate_equal_power);
    if (r.csi_variance == kFig4Variance && r.subcarrier_fraction == kFig4Fraction) noisy.push_back(r.rate.rate_equal_power);
  }
  const double rel = std::abs(mean(noisy) - mean(clean)) / mean(clean);
  report("fig4_robustness", rel <= kFig4Tolerance,
         fmt("12 users, RPN-best: clean mean %.4f, %.0f%% subcarriers + variance %.2f mean %.4f, deviation %.2f%% "
             "(<= %.0f%%) over %zu realizations",
             mean(clean), 100.0 * kFig4Fraction, kFig4Variance, mean(noisy), 100.0 * rel, 100.0 * kFig4Tolerance,
             clean.size()));
}

void fhp_reversibility() {
  using namespace revcomm::lattice;
  const auto t0 = std::chrono::steady_clock::now();
  int exact = 0;
  Index mass_violations = 0;
  for (int i = 0; i < kLatticeCount; ++i) {
    Rng rng(static_cast<std::uint64_t>(9000 + i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double density = 0.05 + 0.5 * u(rng);
    const double walls = i % 2 ? 0.05 : 0.0;
    LatticeState s(64, 64);
    for (Index y = 0; y < 64; ++y)
      for (Index x = 0; x < 64; ++x) {
        if (u(rng) < walls) {
          s.set_obstacle({x, y});
          continue;
        }
        std::uint8_t bits = 0;
        for (int d = 0; d < kDirections; ++d)
          if (u(rng) < density) bits |= bit(d);
        s.set_occupancy({x, y}, bits);
      }
    const LatticeState start = s;
    const Index n = s.particle_count();
    for (Index t = 0; t < kLatticeSteps; ++t) {
      s = step(s);
      mass_violations += s.particle_count() != n;
    }
    bool all_exact = true;
    for (Index t = 0; t < kLatticeSteps; ++t) {
      auto r = step_reverse(s);
      all_exact = all_exact && r.exact;
      s = std::move(r.state);
      mass_violations += s.particle_count() != n;
    }
    exact += all_exact && s.same_configuration(start);
  }
  const double secs = seconds_since(t0);
  report("fhp_reversibility", exact == kLatticeCount && mass_violations == 0 && secs < kLatticeBudget,
         fmt("%d/%d random 64x64 closed lattices restored bit-exactly after %lld steps forward and back; "
             "particle-count violations %lld; %.1f s (< %.0f s)",
             exact, kLatticeCount, static_cast<long long>(kLatticeSteps), static_cast<long long>(mass_violations), secs,
             kLatticeBudget));
}

void trm_refocusing() {
  ExperimentConfig c;  // 64x64 empty medium, full ring mirror, pulse at the center
  c.realizations = kTrmRealizations;
  const auto rows = run_trm_refocus(c);
  double full = 0.0, edge = 0.0, trit = 0.0, background = 0.0, zero = 0.0;
  for (const auto& r : rows) {
    full += r.result.metric_full;
    edge += r.result.metric_one_edge;
    trit += r.result.metric_one_trit;
    background += r.result.metric_background;
    zero += r.result.metric_zero;
  }
  const double n = static_cast<double>(rows.size());
  full /= n, edge /= n, trit /= n, background /= n, zero /= n;
  const bool focus = full >= kFocusOverBackground * background;
  const bool aperture = full >= edge;
  const bool one_trit = trit >= kOneTritFraction * full;
  report("trm_refocusing", focus && aperture && one_trit,
         fmt("%lld realizations: full-ring metric %.4f vs background %.4f (%.1fx, >= %.0fx); one edge %.4f "
             "(<= full); one-trit %.4f = %.0f%% of full (>= %.0f%%); zero recording %.4f",
             static_cast<long long>(rows.size()), full, background, full / background, kFocusOverBackground, edge, trit,
             100.0 * trit / full, 100.0 * kOneTritFraction, zero));
}

void erasure_ledger() {
  using namespace revcomm::erasure;
  const std::vector<std::uint64_t> ks{2, 4, 8, 16, 32, 64, 128, 256}, ms{1, 2, 4, 8, 12, 16, 24};
  const auto rows = sweep_erasures(ks, ms);
  std::map<std::tuple<Variant, std::uint64_t, std::uint64_t>, std::uint64_t> e;
  Index nonzero_reversible = 0;
  for (const auto& r : rows) {
    e[{r.spec.variant, r.spec.waiting_samples, r.spec.adc_bits}] = r.ledger.erased_bits;
    if (r.spec.variant == Variant::kReversible && r.ledger.erased_bits != 0) ++nonzero_reversible;
  }
  Index order = 0, mono = 0;
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = 0; j < ms.size(); ++j) {
      if (e[{Variant::kIrreversibleFft, ks[i], ms[j]}] < e[{Variant::kIrreversibleTime, ks[i], ms[j]}]) ++order;
      for (Variant v : {Variant::kIrreversibleTime, Variant::kIrreversibleFft}) {
        if (i + 1 < ks.size() && e[{v, ks[i + 1], ms[j]}] <= e[{v, ks[i], ms[j]}]) ++mono;
        if (j + 1 < ms.size() && e[{v, ks[i], ms[j + 1]}] <= e[{v, ks[i], ms[j]}]) ++mono;
      }
    }
  report("erasure_ledger", nonzero_reversible == 0 && order == 0 && mono == 0,
         fmt("%zu rows over k x m = %zu x %zu: reversible nonzero %lld; fft < time %lld; non-increasing steps %lld",
             rows.size(), ks.size(), ms.size(), static_cast<long long>(nonzero_reversible),
             static_cast<long long>(order), static_cast<long long>(mono)));
}

// Loads the config that produced `dir` and checks the recorded hash.
ExperimentConfig config_for(const std::filesystem::path& dir, const std::string& hash) {
  std::ifstream in(dir / "meta.json");
  const auto meta = nlohmann::json::parse(in);
  require(meta.at("config_hash").get<std::string>() == hash, "meta.json hash does not match the row");
  const auto c = meta.at("config").get<ExperimentConfig>();
  require(hex64(config_hash(c)) == hash, "stored config does not hash to its recorded value");
  return c;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

bool contains_line(const CsvTable& t, const std::vector<std::string>& cells) {
  const std::string want = CsvTable::join(cells);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.row_line(i) == want) return true;
  return false;
}

void determinism() {
  const std::filesystem::path root = "acceptance_artifacts/determinism";
  std::filesystem::remove_all(root);
  ExperimentConfig base;
  base.seed = 99;
  base.scene.num_antennas = 32;
  base.scene.num_subcarriers = 20;
  base.topology_rows = 4;
  base.topology_cols = 8;
  base.n_ts = 8;
  base.realizations = 3;
  base.user_counts = {4, 8};
  base.n_users = 6;
  base.oracle_instances = 6;
  base.lattice.duration = 60;
  base.backscatter_waits = {30};

  auto run = [&](Experiment e, const std::string& name) {
    ExperimentConfig c = base;
    c.experiment = e;
    const auto h = config_hash(c);
    const auto dir = root / name;
    switch (e) {
      case Experiment::kFig3Sweep: {
        const auto t = fig3_table(run_fig3_sweep(c), h);
        persist(dir, c, name, {{"results.csv", &t}});
        break;
      }
      case Experiment::kFig4Robustness: {
        const auto t = fig4_table(run_fig4_robustness(c), h);
        persist(dir, c, name, {{"results.csv", &t}});
        break;
      }
      case Experiment::kRpnVsOracle: {
        const auto t = oracle_table(run_rpn_vs_oracle(c), h);
        persist(dir, c, name, {{"results.csv", &t}});
        break;
      }
      case Experiment::kTrmRefocus: {
        const auto t = trm_table(run_trm_refocus(c), h);
        const auto b = backscatter_table(run_backscatter(c), h);
        persist(dir, c, name, {{"results.csv", &t}, {"backscatter.csv", &b}});
        break;
      }
      case Experiment::kErasureSweep: {
        const auto t = erasure_table(erasure::sweep_erasures(c.erasure_k, c.erasure_m), h, c.seed);
        persist(dir, c, name, {{"results.csv", &t}});
        break;
      }
    }
  };
  run(Experiment::kFig3Sweep, "fig3");
  run(Experiment::kFig4Robustness, "fig4");
  run(Experiment::kRpnVsOracle, "oracle");
  run(Experiment::kTrmRefocus, "trm");
  run(Experiment::kErasureSweep, "erasure");

  // Each row rebuilt from (config hash -> meta.json config, seed) alone.
  Index checked = 0, mismatched = 0;
  auto check = [&](const std::string& name, const std::string& file,
                   const std::function<CsvTable(const ExperimentConfig&, const std::vector<std::string>&)>& regen) {
    for (const auto& row : read_rows(root / name / file)) {
      const auto c = config_for(root / name, row[0]);
      ++checked;
      if (!contains_line(regen(c, row), row)) ++mismatched;
    }
  };
  auto u64 = [](const std::string& s) { return std::stoull(s); };
  auto idx = [](const std::string& s) { return static_cast<Index>(std::stoll(s)); };
  check("fig3", "results.csv", [&](const ExperimentConfig& c, const auto& r) {
    return fig3_table(fig3_realization(c, idx(r[3]), u64(r[1]), idx(r[2])), config_hash(c));
  });
  check("fig4", "results.csv", [&](const ExperimentConfig& c, const auto& r) {
    return fig4_table(fig4_realization(c, u64(r[1]), idx(r[2])), config_hash(c));
  });
  check("oracle", "results.csv", [&](const ExperimentConfig& c, const auto& r) {
    return oracle_table(oracle_instance(c, idx(r[3]), u64(r[1]), idx(r[2])), config_hash(c));
  });
  check("trm", "results.csv", [&](const ExperimentConfig& c, const auto& r) {
    return trm_table({trm_realization(c, u64(r[1]), idx(r[2]))}, config_hash(c));
  });
  check("trm", "backscatter.csv", [&](const ExperimentConfig& c, const auto& r) {
    return backscatter_table(backscatter_realization(c, u64(r[1]), idx(r[2])), config_hash(c));
  });
  check("erasure", "results.csv", [&](const ExperimentConfig& c, const auto& r) {
    return erasure_table(erasure::sweep_erasures(c.erasure_k, c.erasure_m), config_hash(c), u64(r[1]));
  });
  report("determinism", checked > 0 && mismatched == 0,
         fmt("%lld rows across fig3/fig4/oracle/trm/backscatter/erasure regenerated from (config hash, seed); "
             "%lld differ",
             static_cast<long long>(checked), static_cast<long long>(mismatched)));
}

}  // namespace

int main() {
  criterion("capacity_oracle", capacity_oracle);
  criterion("non_submodularity", non_submodularity);
  criterion("rpn_invariants", rpn_invariants);
  criterion("rpn_convergence", convergence);
  criterion("selection_quality", selection_quality);
  criterion("fig3_trend", fig3_trend);
  criterion("fig4_robustness", fig4_robustness);
  criterion("fhp_reversibility", fhp_reversibility);
  criterion("trm_refocusing", trm_refocusing);
  criterion("erasure_ledger", erasure_ledger);
  criterion("determinism", determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
