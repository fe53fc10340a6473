// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-round decision makers. Every policy searches channel allocations with
// the same genetic allocator and the same drift-plus-penalty objective; they
// differ only in how a scheduled client's level q and frequency f are chosen.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qccf/channel_ga.hpp"
#include "qccf/kkt_solver.hpp"
#include "qccf/lyapunov.hpp"
#include "qccf/wireless.hpp"

namespace qccf {

enum class PolicyKind { qccf, no_quant, channel_allocate, principle, same_size };

std::string_view to_string(PolicyKind kind) noexcept;
/// Throws Error(invalid_config) for unknown names.
PolicyKind parse_policy(std::string_view name);

/// Level schedule of the "principle" baseline:
/// q = clamp(round(base + slope * (n / N) * (D_i / mean D) * span), 1, 32).
struct PrincipleSchedule {
  double base = 2.0;
  double slope = 1.0;
  double span = 8.0;
};

/// Round-invariant inputs shared by all policies.
struct PolicyConfig {
  WirelessConfig wireless;
  std::vector<ClientProfile> profiles;
  LyapunovParams lyapunov;
  std::size_t model_dim = 8010;
  double t_max = 0.05;
  int total_rounds = 200;
  GaParams ga;
  PrincipleSchedule principle;
  int workers = 1;

  int clients() const noexcept { return static_cast<int>(profiles.size()); }
  std::vector<int> sizes() const;
};

/// What the server knows at the start of a round.
struct SystemState {
  QueueState queues;
  std::vector<LocalStats> stats;  // smoothed, possibly stale
  std::vector<int> q_last;        // Newton anchor per client
  ChannelGains gains;
};

struct ClientCost {
  double rate_bps = 0.0;
  double t_cmp = 0.0;
  double t_com = 0.0;
  double e_cmp = 0.0;
  double e_com = 0.0;

  double energy() const noexcept { return e_cmp + e_com; }
  double latency() const noexcept { return t_cmp + t_com; }
};

/// Upload size of client i under a decision.
std::uint64_t upload_bits(const RoundDecision& d, int client, std::size_t model_dim);

/// Latency and energy of every scheduled client; zeros for the others.
/// Depends only on the decision, never on the policy that produced it.
std::vector<ClientCost> price_decision(const RoundDecision& d,
                                       const WirelessConfig& wireless,
                                       std::span<const ClientProfile> profiles,
                                       const ChannelGains& gains,
                                       std::size_t model_dim);

/// Level of the principle baseline for client i in round n.
int principle_bits(const PrincipleSchedule& s, int round, int total_rounds,
                   int size, double mean_size);

/// Largest level whose deadline is met at some f <= f_max (0 if none).
int largest_feasible_bits(const ClientSolveInput& in);

/// Inner (q, f) choice for one scheduled client.
struct InnerChoice {
  bool feasible = false;
  int bits = 1;
  double freq_hz = 0.0;
  SolveCase tag = SolveCase::infeasible;
  double j3 = 0.0;
};

/// Prices one chromosome under a policy. `details`, when given, receives
/// the per-client inner choices (unscheduled clients keep defaults).
AllocationValue evaluate_allocation(PolicyKind kind, const PolicyConfig& cfg,
                                    const SystemState& state, int round,
                                    const Chromosome& chrom,
                                    std::vector<InnerChoice>* details = nullptr);

struct PolicyOutcome {
  RoundDecision decision;
  double objective = 0.0;
  std::vector<InnerChoice> inner;
  Chromosome chromosome;
  std::vector<double> ga_best;
  int ga_evaluations = 0;
};

PolicyOutcome decide(PolicyKind kind, const PolicyConfig& cfg,
                     const SystemState& state, int round, Rng& rng);

PolicyOutcome decide_qccf(const PolicyConfig& cfg, const SystemState& state,
                          int round, Rng& rng);
PolicyOutcome decide_no_quantization(const PolicyConfig& cfg,
                                     const SystemState& state, int round, Rng& rng);
PolicyOutcome decide_channel_allocate(const PolicyConfig& cfg,
                                      const SystemState& state, int round, Rng& rng);
PolicyOutcome decide_principle(const PolicyConfig& cfg, const SystemState& state,
                               int round, Rng& rng);
PolicyOutcome decide_same_size(const PolicyConfig& cfg, const SystemState& state,
                               int round, Rng& rng);

}  // namespace qccf
