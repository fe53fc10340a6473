// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// qccf: run experiments, V sweeps, bound checks and oracle suites.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qccf/error.hpp"
#include "qccf/parallel.hpp"
#include "qccf/simctl.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

bool is_config_error(qccf::Errc code) {
  return code == qccf::Errc::invalid_config || code == qccf::Errc::premise_violation ||
         code == qccf::Errc::invalid_dataset;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoull(item));
  return out;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed,
            const std::string& policy, const std::string& out) {
  auto cfg = qccf::load_config(config);
  if (seed) cfg.seed = *seed;
  if (!policy.empty()) cfg.policy = policy;
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.output_dir.empty()) cfg.output_dir = "out";
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  const auto r = qccf::run_experiment(cfg, qccf::default_worker_count());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("policy={} seed={} rounds={} energy={:.6g} J acc={:.4f} loss={:.4f} ({:.1f} s)\n",
             r.policy, r.seed, cfg.rounds, r.total_energy, r.final_accuracy, r.final_loss,
             secs);
  fmt::print("wrote {}/{{trace.csv,summary.json,diagnostics.jsonl}}\n", cfg.output_dir);
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<double>& v_list,
              const std::string& seeds, const std::string& out) {
  auto cfg = qccf::load_config(config);
  if (!out.empty()) cfg.output_dir = out;
  const auto values = v_list.empty() ? cfg.v_sweep : v_list;
  const auto seed_list =
      seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_seeds(seeds);
  const auto points = qccf::run_sweep(cfg, values, seed_list, qccf::default_worker_count());
  fmt::print("{:>10} {:>14} {:>10}\n", "V", "energy_J", "accuracy");
  for (const auto& p : points) {
    fmt::print("{:>10g} {:>14.6g} {:>10.4f}\n", p.v, p.mean_total_energy,
               p.mean_final_accuracy);
  }
  return 0;
}

int cmd_validate(const std::string& config, const std::string& out) {
  const auto cfg = qccf::load_config(config);
  const auto rep = qccf::run_bound_harness(cfg.bounds);
  nlohmann::json j;
  j["smoothness"] = rep.smoothness;
  j["lemma_lhs"] = rep.lemma_lhs;
  j["lemma_rhs"] = rep.lemma_rhs;
  j["lemma_holds"] = rep.lemma_holds;
  j["theorem_lhs"] = rep.theorem_lhs;
  j["theorem_rhs"] = rep.theorem_rhs;
  j["theorem_holds"] = rep.theorem_holds;
  j["seeds"] = cfg.bounds.seeds;
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    fmt::print("{}", text);
  } else {
    const std::filesystem::path path(out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream(path) << text;
    fmt::print("lemma {} theorem {} -> {}\n", rep.lemma_holds ? "holds" : "violated",
               rep.theorem_holds ? "holds" : "violated", out);
  }
  return 0;
}

int cmd_oracle(const std::string& module, int trials, std::uint64_t seed) {
  if (module == "kkt") {
    const auto r = qccf::run_kkt_oracle_suite(trials, seed);
    fmt::print("trials={} feasible={} bits_match={} objective_violations={} "
               "worst_relative_gap={:.3e} rounding_match={}/{}\n",
               r.trials, r.feasible, r.bits_match, r.objective_violations,
               r.worst_relative_gap, r.rounding_match, r.rounding_trials);
    for (int c = 0; c < 9; ++c) {
      if (r.case_counts[c] == 0) continue;
      fmt::print("  {:<10} {}\n", qccf::to_string(static_cast<qccf::SolveCase>(c)),
                 r.case_counts[c]);
    }
    return 0;
  }
  const auto r = qccf::run_ga_oracle_suite(trials, seed);
  fmt::print("trials={} matches={} below_optimum={} worst_gap={:.3e}\n", r.trials,
             r.matches, r.below, r.worst_gap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware quantized federated learning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string policy;
  std::string out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run one experiment and write trace files");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--seed", seed, "Override the root seed");
  run->add_option("--policy", policy, "qccf, no_quant, channel_allocate, principle, same_size");
  run->add_option("--out", out, "Output directory");

  std::vector<double> v_list;
  std::string seeds;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per V value");
  sweep->add_option("--config", config, "Config file")->required();
  sweep->add_option("--v-list", v_list, "V values (defaults to [sweep] v_values)")
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "Comma-separated seeds (default: config seed)");
  sweep->add_option("--out", out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check the convergence bounds on a toy problem");
  validate->add_option("--config", config, "Config file")->required();
  validate->add_option("--out", out, "Report path (default: stdout)");

  std::string module;
  int trials = 1000;
  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "Compare solvers against brute force");
  oracle->add_option("--module", module, "kkt or ga")
      ->required()
      ->check(CLI::IsMember({"kkt", "ga"}));
  oracle->add_option("--trials", trials, "Number of random instances")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oracle_seed, "Instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, seed, policy, out);
    if (*sweep) return cmd_sweep(config, v_list, seeds, out);
    if (*validate) return cmd_validate(config, out);
    if (*oracle) return cmd_oracle(module, trials, oracle_seed);
  } catch (const qccf::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
