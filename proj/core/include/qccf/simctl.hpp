// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: configuration, the seeded round loop, trace
// files, V sweeps and the oracle comparison suites behind the CLI.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qccf/bounds.hpp"
#include "qccf/policies.hpp"

namespace qccf {

struct ExperimentConfig {
  // [run]
  std::string policy = "qccf";
  int rounds = 200;
  std::uint64_t seed = 1;
  std::string output_dir;

  // [data]
  int features = 800;
  int classes = 10;
  double class_separation = 0.12;
  int classes_per_client = 3;
  int test_size = 2000;
  double init_std = 0.01;

  // [clients]
  int num_clients = 10;
  double size_mean = 1200.0;
  double size_std = 300.0;
  double distance_min_m = 50.0;
  double distance_max_m = 500.0;
  ClientProfile profile;  // dataset_size and distance are filled per client

  // [wireless]
  WirelessConfig wireless;

  // [learning]
  double eta = 0.05;
  double smoothness = 1.0;
  double v = 1.0;
  double t_max = 0.05;
  int q_init = 8;
  // Level of the all-clients reference round that the queue targets scale.
  int reference_bits = 1;
  std::optional<double> eps1;
  std::optional<double> eps2;
  double eps1_scale = 0.9;
  double eps2_scale = 0.9;
  double stats_smoothing = 0.5;

  GaParams ga;
  PrincipleSchedule principle;
  std::vector<double> v_sweep;
  ToyHarnessConfig bounds;

  /// Throws Error(invalid_config) / Error(premise_violation).
  void validate() const;
  std::size_t model_dim() const noexcept {
    return static_cast<std::size_t>(features) * classes + classes;
  }
};

/// INI-style "key = value" file with [sections]. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

struct ClientRoundRecord {
  bool scheduled = false;
  int bits = 0;
  double freq_hz = 0.0;
  int channel = -1;
  ClientCost cost;
  SolveCase tag = SolveCase::infeasible;
  double j3 = 0.0;
};

struct RoundRecord {
  int round = 0;
  std::vector<ClientRoundRecord> clients;
  double lambda1 = 0.0;  // queues at the end of the round
  double lambda2 = 0.0;
  double arrival1 = 0.0;
  double arrival2 = 0.0;
  double objective = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  double cumulative_energy = 0.0;
  int participants = 0;
  std::vector<double> ga_best;
  int ga_evaluations = 0;
  std::vector<LocalStats> stats;  // server-side statistics after the round
};

struct ExperimentResult {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<int> sizes;
  std::vector<double> distances_m;
  double eps1 = 0.0;
  double eps2 = 0.0;
  // Reference arrivals (full participation at q_init) the targets derive from.
  double reference_arrival1 = 0.0;
  double reference_arrival2 = 0.0;
  std::vector<RoundRecord> rounds;  // rounds[0] is the initial evaluation
  double total_energy = 0.0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
};

/// Runs one experiment. Writes trace.csv, summary.json and diagnostics.jsonl
/// under cfg.output_dir when it is non-empty. Deterministic in (cfg, seed)
/// and independent of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

/// CSV column header of trace.csv.
std::string trace_header();
std::string format_trace(const ExperimentResult& result);

struct SweepPoint {
  double v = 0.0;
  double mean_total_energy = 0.0;
  double mean_final_accuracy = 0.0;
  std::vector<double> total_energy;  // per seed
  std::vector<double> final_accuracy;
};

/// One experiment per (V, seed). Throws Error(invalid_config) for an empty V
/// list. Writes sweep.json (and per-run traces) under cfg.output_dir.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg,
                                  const std::vector<double>& v_values,
                                  const std::vector<std::uint64_t>& seeds,
                                  int workers = 1);

// --- oracle comparison suites -------------------------------------------------

struct KktOracleReport {
  int trials = 0;
  int feasible = 0;
  int case_counts[9] = {};        // indexed by SolveCase
  int bits_match = 0;             // closed form q* == grid q*
  int objective_violations = 0;   // closed form J3 > grid J3 + 1e-4 |grid J3|
  double worst_relative_gap = 0.0;
  int rounding_trials = 0;
  int rounding_match = 0;         // floor/ceil rule == integer sweep
};

/// Randomized per-client instances stratified so every closed-form case is
/// exercised, each solved in closed form and by grid search.
KktOracleReport run_kkt_oracle_suite(int trials, std::uint64_t seed);

/// Random instance drawn from the suite's generator (stratum = trial % 6).
ClientSolveInput random_solve_instance(int trial, Rng& rng);

struct GaOracleReport {
  int trials = 0;
  int matches = 0;      // GA J within 1e-9 of the enumeration optimum
  int below = 0;        // GA J below the enumeration optimum (must be 0)
  double worst_gap = 0.0;
};

/// (clients x channels) instances priced with the QCCF evaluator; GA with
/// default parameters against exhaustive enumeration.
GaOracleReport run_ga_oracle_suite(int trials, std::uint64_t seed, int clients = 3,
                                   int channels = 3);

/// Random small system for the GA suite.
struct GaInstance {
  PolicyConfig config;
  SystemState state;
};
GaInstance random_ga_instance(int clients, int channels, Rng& rng);

}  // namespace qccf
