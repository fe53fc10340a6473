// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qccf/error.hpp"

namespace qccf {
namespace {

constexpr double kFreqSlack = 1e-12;

InnerChoice fixed_payload_choice(double payload_bits, int bits,
                                 const ClientSolveInput& in) {
  const auto& prof = in.client.profile;
  const double slack = in.client.rate_bps * in.t_max - payload_bits;
  if (!(slack > 0.0)) return {};
  const double needed = in.client.rate_bps * compute_cycles(prof) / slack;
  if (needed > prof.f_max_hz * (1.0 + kFreqSlack)) return {};
  InnerChoice c;
  c.feasible = true;
  c.bits = bits;
  c.freq_hz = std::clamp(needed, prof.f_min_hz, prof.f_max_hz);
  c.tag = SolveCase::rule;
  return c;
}

InnerChoice level_choice(int bits, const ClientSolveInput& in) {
  if (bits < 1) return {};
  const auto f = best_frequency_given_q(bits, in);
  if (!f) return {};
  InnerChoice c;
  c.feasible = true;
  c.bits = bits;
  c.freq_hz = *f;
  c.tag = SolveCase::rule;
  c.j3 = per_client_J3(*f, bits, in.client, in.lambda2, in.params);
  return c;
}

InnerChoice inner_choice(PolicyKind kind, const ClientSolveInput& in,
                         const PolicyConfig& cfg, int round, double mean_size) {
  switch (kind) {
    case PolicyKind::qccf:
    case PolicyKind::same_size: {
      const auto out = solve_client(in);
      if (out.tag == SolveCase::infeasible) return {};
      return {true, out.bits, out.freq_hz, out.tag, out.j3};
    }
    case PolicyKind::no_quant: {
      const auto payload =
          static_cast<double>(full_precision_payload_bits(in.client.model_dim));
      return fixed_payload_choice(payload, kMaxQuantizationBits, in);
    }
    case PolicyKind::channel_allocate:
      return level_choice(largest_feasible_bits(in), in);
    case PolicyKind::principle:
      return level_choice(principle_bits(cfg.principle, round, cfg.total_rounds,
                                         in.client.profile.dataset_size, mean_size),
                          in);
  }
  return {};
}

}  // namespace

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::qccf: return "qccf";
    case PolicyKind::no_quant: return "no_quant";
    case PolicyKind::channel_allocate: return "channel_allocate";
    case PolicyKind::principle: return "principle";
    case PolicyKind::same_size: return "same_size";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (auto k : {PolicyKind::qccf, PolicyKind::no_quant, PolicyKind::channel_allocate,
                 PolicyKind::principle, PolicyKind::same_size}) {
    if (name == to_string(k)) return k;
  }
  throw Error(Errc::invalid_config, "unknown policy '" + std::string(name) + "'");
}

std::vector<int> PolicyConfig::sizes() const {
  std::vector<int> s(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) s[i] = profiles[i].dataset_size;
  return s;
}

std::uint64_t upload_bits(const RoundDecision& d, int client, std::size_t model_dim) {
  return d.full_precision ? full_precision_payload_bits(model_dim)
                          : payload_bits(model_dim, d.bits[client]);
}

std::vector<ClientCost> price_decision(const RoundDecision& d,
                                       const WirelessConfig& wireless,
                                       std::span<const ClientProfile> profiles,
                                       const ChannelGains& gains,
                                       std::size_t model_dim) {
  std::vector<ClientCost> costs(profiles.size());
  for (int i = 0; i < d.clients(); ++i) {
    if (!d.scheduled(i)) continue;
    auto& c = costs[i];
    const auto row = d.allocation_row(i, wireless.num_channels);
    c.rate_bps = uplink_rate(row, gains.row(i), wireless);
    c.t_cmp = compute_latency(profiles[i], d.freq_hz[i]);
    c.e_cmp = compute_energy(profiles[i], d.freq_hz[i]);
    c.t_com = uplink_latency(static_cast<double>(upload_bits(d, i, model_dim)), c.rate_bps);
    c.e_com = uplink_energy(wireless.tx_power_w, c.t_com);
  }
  return costs;
}

int principle_bits(const PrincipleSchedule& s, int round, int total_rounds,
                   int size, double mean_size) {
  const double progress =
      total_rounds > 0 ? static_cast<double>(round) / total_rounds : 0.0;
  const double q = s.base + s.slope * progress * (size / mean_size) * s.span;
  return static_cast<int>(std::clamp(std::round(q), 1.0,
                                     static_cast<double>(kMaxQuantizationBits)));
}

int largest_feasible_bits(const ClientSolveInput& in) {
  const auto& prof = in.client.profile;
  const double z = static_cast<double>(in.client.model_dim);
  const double tight = (in.client.rate_bps * in.t_max -
                        in.client.rate_bps * compute_cycles(prof) / prof.f_max_hz -
                        z - 32.0) / z;
  if (!(tight >= 1.0)) return best_frequency_given_q(1.0, in) ? 1 : 0;
  int q = static_cast<int>(std::min<double>(std::floor(tight), in.q_cap));
  while (q >= 1 && !best_frequency_given_q(q, in)) --q;
  // Round-off in the closed form can also hide one more feasible level.
  while (q < in.q_cap && best_frequency_given_q(q + 1, in)) ++q;
  return std::max(q, 0);
}

AllocationValue evaluate_allocation(PolicyKind kind, const PolicyConfig& cfg,
                                    const SystemState& state, int round,
                                    const Chromosome& chrom,
                                    std::vector<InnerChoice>* details) {
  const int clients = cfg.clients();
  std::vector<int> sizes = cfg.sizes();
  const double mean_size =
      std::accumulate(sizes.begin(), sizes.end(), 0.0) / std::max(1, clients);
  std::vector<ClientProfile> profiles = cfg.profiles;
  if (kind == PolicyKind::same_size) {
    const int largest = *std::max_element(sizes.begin(), sizes.end());
    for (auto& s : sizes) s = largest;
    for (auto& p : profiles) p.dataset_size = largest;
  }

  AllocationValue value;
  RoundDecision& d = value.decision;
  d = RoundDecision::empty(clients);
  d.full_precision = kind == PolicyKind::no_quant;
  for (std::size_t c = 0; c < chrom.size(); ++c) {
    const int i = chrom[c];
    if (i == kNoClient) continue;
    d.participate[i] = 1;
    d.channel[i] = static_cast<int>(c);
  }
  if (details != nullptr) details->assign(clients, InnerChoice{});

  const auto w = participant_weights(d.participate, sizes);
  std::vector<double> energy(clients, 0.0);
  for (int i = 0; i < clients; ++i) {
    if (!d.scheduled(i)) continue;
    ClientSolveInput in;
    in.client.rate_bps = channel_rate(state.gains(i, d.channel[i]), cfg.wireless);
    in.client.weight = w[i];
    in.client.theta_max = state.stats[i].theta_max;
    in.client.profile = profiles[i];
    in.client.tx_power_w = cfg.wireless.tx_power_w;
    in.client.model_dim = cfg.model_dim;
    in.lambda2 = state.queues.lambda2;
    in.params = cfg.lyapunov;
    in.t_max = cfg.t_max;
    in.q_last = state.q_last[i];

    const auto choice = inner_choice(kind, in, cfg, round, mean_size);
    if (details != nullptr) (*details)[i] = choice;
    if (!choice.feasible) {
      value.feasible = false;
      return value;
    }
    d.bits[i] = choice.bits;
    d.freq_hz[i] = choice.freq_hz;
    energy[i] = compute_energy(profiles[i], choice.freq_hz) +
                uplink_energy(cfg.wireless.tx_power_w,
                              static_cast<double>(upload_bits(d, i, cfg.model_dim)) /
                                  in.client.rate_bps);
  }
  value.feasible = true;
  value.objective = objective_J(state.queues, d, sizes, state.stats, energy,
                                cfg.lyapunov, cfg.model_dim);
  return value;
}

PolicyOutcome decide(PolicyKind kind, const PolicyConfig& cfg,
                     const SystemState& state, int round, Rng& rng) {
  const AllocationEvaluator eval = [&](const Chromosome& c) {
    return evaluate_allocation(kind, cfg, state, round, c);
  };
  auto res = ga_allocate(cfg.clients(), cfg.wireless.num_channels, cfg.ga, eval, rng,
                         cfg.workers);
  PolicyOutcome out;
  out.decision = std::move(res.value.decision);
  out.objective = res.value.objective;
  out.chromosome = res.best;
  out.ga_best = std::move(res.best_per_generation);
  out.ga_evaluations = res.evaluations;
  evaluate_allocation(kind, cfg, state, round, out.chromosome, &out.inner);
  return out;
}

PolicyOutcome decide_qccf(const PolicyConfig& cfg, const SystemState& state,
                          int round, Rng& rng) {
  return decide(PolicyKind::qccf, cfg, state, round, rng);
}

PolicyOutcome decide_no_quantization(const PolicyConfig& cfg,
                                     const SystemState& state, int round, Rng& rng) {
  return decide(PolicyKind::no_quant, cfg, state, round, rng);
}

PolicyOutcome decide_channel_allocate(const PolicyConfig& cfg,
                                      const SystemState& state, int round, Rng& rng) {
  return decide(PolicyKind::channel_allocate, cfg, state, round, rng);
}

PolicyOutcome decide_principle(const PolicyConfig& cfg, const SystemState& state,
                               int round, Rng& rng) {
  return decide(PolicyKind::principle, cfg, state, round, rng);
}

PolicyOutcome decide_same_size(const PolicyConfig& cfg, const SystemState& state,
                               int round, Rng& rng) {
  return decide(PolicyKind::same_size, cfg, state, round, rng);
}

}  // namespace qccf
