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

// revcomm: run one experiment family and write results.csv + meta.json.
//
//   revcomm fig3    --config configs/fig3.json --out runs/fig3
//   revcomm fig4    --config configs/fig4.json --seed 7 --out runs/fig4
//   revcomm oracle  --config configs/oracle.json --out runs/oracle
//   revcomm trm     --config configs/trm.json --out runs/trm
//   revcomm erasure --config configs/erasure.json --out runs/erasure

#include <CLI11.hpp>
#include <iostream>

#include "revcomm/harness.hpp"

namespace {

using namespace revcomm;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<Index> threads;
  std::string out;
};

ExperimentConfig resolve(const Options& o, Experiment experiment) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    require(static_cast<bool>(in), "cannot open config '" + o.config + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput("config '" + o.config + "': " + e.what());
    }
    require(j.is_object(), "config: expected a JSON object");
    if (j.contains("experiment"))
      require(j.at("experiment") == to_string(experiment),
              "config is for '" + j.at("experiment").get<std::string>() + "', not '" + to_string(experiment) + "'");
    j["experiment"] = to_string(experiment);
    c = j.get<ExperimentConfig>();
  }
  c.experiment = experiment;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  validate(c);
  return c;
}

void run(const std::string& command, const Options& o) {
  static const std::map<std::string, Experiment> kinds{{"fig3", Experiment::kFig3Sweep},
                                                        {"fig4", Experiment::kFig4Robustness},
                                                        {"oracle", Experiment::kRpnVsOracle},
                                                        {"trm", Experiment::kTrmRefocus},
                                                        {"erasure", Experiment::kErasureSweep}};
  const ExperimentConfig c = resolve(o, kinds.at(command));
  const std::uint64_t hash = config_hash(c);
  const std::filesystem::path dir = o.out;
  require(!std::filesystem::exists(dir / "results.csv"), "refusing to overwrite existing '" + (dir / "results.csv").string() + "'");
  std::cerr << "revcomm " << command << ": config " << hex64(hash) << ", seed " << c.seed << '\n';

  switch (c.experiment) {
    case Experiment::kFig3Sweep: {
      const auto t = fig3_table(run_fig3_sweep(c), hash);
      persist(dir, c, command, {{"results.csv", &t}});
      break;
    }
    case Experiment::kFig4Robustness: {
      const auto t = fig4_table(run_fig4_robustness(c), hash);
      persist(dir, c, command, {{"results.csv", &t}});
      break;
    }
    case Experiment::kRpnVsOracle: {
      const auto t = oracle_table(run_rpn_vs_oracle(c), hash);
      persist(dir, c, command, {{"results.csv", &t}});
      break;
    }
    case Experiment::kTrmRefocus: {
      const auto t = trm_table(run_trm_refocus(c), hash);
      const auto b = backscatter_table(run_backscatter(c), hash);
      persist(dir, c, command, {{"results.csv", &t}, {"backscatter.csv", &b}});
      break;
    }
    case Experiment::kErasureSweep: {
      const auto t = erasure_table(erasure::sweep_erasures(c.erasure_k, c.erasure_m), hash, c.seed);
      persist(dir, c, command, {{"results.csv", &t}});
      break;
    }
  }
  std::cerr << "revcomm " << command << ": wrote " << (dir / "results.csv").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antenna selection and time-reversal experiments"};
  app.set_version_flag("--version", std::string(revcomm::kVersion));
  app.require_subcommand(1);
  std::vector<std::pair<std::string, std::string>> commands{
      {"fig3", "sum rate vs. user count for greedy, random and RPN selection"},
      {"fig4", "selection on noisy and subsampled CSI, scored on the true channel"},
      {"oracle", "greedy and RPN against exhaustive search on small arrays"},
      {"trm", "time-reversal mirror refocusing and backscatter loss on the lattice gas"},
      {"erasure", "bit-erasure ledger for digital time-reversal pipelines"}};
  Options opt;
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON experiment config (defaults apply to missing keys)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed, overrides the config");
    sub->add_option("--threads", opt.threads, "worker threads, 0 for all cores");
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->callback([&chosen, name = name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    run(chosen, opt);
  } catch (const std::exception& e) {
    std::cerr << "revcomm " << chosen << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
