// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/policies.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "qccf/error.hpp"
#include "qccf/rng.hpp"

namespace qccf {
namespace {

struct Fixture {
  PolicyConfig cfg;
  SystemState state;
};

Fixture make_fixture(int clients, int channels, double t_max) {
  Fixture fx;
  fx.cfg.wireless.num_channels = channels;
  fx.cfg.model_dim = 8010;
  fx.cfg.t_max = t_max;
  fx.cfg.total_rounds = 50;
  fx.cfg.lyapunov.eps1 = 1.0;
  fx.cfg.lyapunov.eps2 = 0.01;
  fx.cfg.lyapunov.v = 100.0;
  fx.cfg.ga.generations = 20;
  for (int i = 0; i < clients; ++i) {
    ClientProfile p;
    p.dataset_size = 800 + 200 * i;
    p.distance_m = 100.0 + 50.0 * i;
    fx.cfg.profiles.push_back(p);
  }
  fx.state.queues = {30.0, 0.5};
  fx.state.stats.assign(clients, LocalStats{1.0, 0.5, 0.2});
  fx.state.q_last.assign(clients, 4);
  fx.state.gains = ChannelGains(clients, channels);
  for (int i = 0; i < clients; ++i) {
    for (int c = 0; c < channels; ++c) {
      fx.state.gains(i, c) = 1e-11 * (1.0 + 0.3 * c) / (1.0 + i);
    }
  }
  return fx;
}

TEST(PolicyNames, RoundTrip) {
  for (auto k : {PolicyKind::qccf, PolicyKind::no_quant, PolicyKind::channel_allocate,
                 PolicyKind::principle, PolicyKind::same_size}) {
    EXPECT_EQ(parse_policy(to_string(k)), k);
  }
  try {
    parse_policy("greedy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_config);
  }
}

TEST(PrincipleRule, GrowsWithProgressAndSize) {
  PrincipleSchedule s;
  EXPECT_EQ(principle_bits(s, 0, 100, 1200, 1200.0), 2);
  EXPECT_EQ(principle_bits(s, 50, 100, 1200, 1200.0), 6);
  EXPECT_EQ(principle_bits(s, 100, 100, 1200, 1200.0), 10);
  EXPECT_EQ(principle_bits(s, 100, 100, 600, 1200.0), 6);
  s.base = 40;
  EXPECT_EQ(principle_bits(s, 0, 100, 1200, 1200.0), kMaxQuantizationBits);
}

TEST(LargestFeasibleBits, MatchesLinearScan) {
  auto fx = make_fixture(1, 1, 0.02);
  ClientSolveInput in;
  in.client.rate_bps = channel_rate(fx.state.gains(0, 0), fx.cfg.wireless);
  in.client.profile = fx.cfg.profiles[0];
  in.client.model_dim = fx.cfg.model_dim;
  for (double t : {0.004, 0.013, 0.02, 0.05}) {
    in.t_max = t;
    int expect = 0;
    for (int q = 1; q <= kMaxQuantizationBits; ++q) {
      if (best_frequency_given_q(q, in)) expect = q;
    }
    EXPECT_EQ(largest_feasible_bits(in), expect) << "t " << t;
  }
}

TEST(Decide, SingleClientGenerousDeadlineIsScheduled) {
  auto fx = make_fixture(1, 1, 0.05);
  Rng rng(1);
  const auto out = decide_qccf(fx.cfg, fx.state, 3, rng);
  ASSERT_EQ(out.decision.participants(), 1);
  EXPECT_EQ(out.decision.channel[0], 0);
  EXPECT_GE(out.decision.bits[0], 1);
  const auto tag = out.inner[0].tag;
  EXPECT_TRUE(tag == SolveCase::case1 || tag == SolveCase::case2 ||
              tag == SolveCase::case3 || tag == SolveCase::case4 ||
              tag == SolveCase::case5);
  const auto ex = exhaustive_allocate(1, 1, [&](const Chromosome& c) {
    return evaluate_allocation(PolicyKind::qccf, fx.cfg, fx.state, 3, c);
  });
  EXPECT_DOUBLE_EQ(out.objective, ex.value.objective);
}

TEST(Decide, ImpossibleDeadlineGivesEmptyRound) {
  auto fx = make_fixture(3, 2, 1e-3);
  for (auto kind : {PolicyKind::qccf, PolicyKind::principle, PolicyKind::same_size,
                    PolicyKind::no_quant, PolicyKind::channel_allocate}) {
    Rng rng(2);
    const auto out = decide(kind, fx.cfg, fx.state, 0, rng);
    EXPECT_EQ(out.decision.participants(), 0) << to_string(kind);
  }
}

TEST(Decide, DeterministicForSeed) {
  auto fx = make_fixture(4, 3, 0.02);
  Rng a(5);
  Rng b(5);
  const auto d1 = decide_qccf(fx.cfg, fx.state, 7, a);
  const auto d2 = decide_qccf(fx.cfg, fx.state, 7, b);
  EXPECT_EQ(d1.decision.participate, d2.decision.participate);
  EXPECT_EQ(d1.decision.bits, d2.decision.bits);
  EXPECT_EQ(d1.decision.freq_hz, d2.decision.freq_hz);
  EXPECT_EQ(d1.objective, d2.objective);
}

TEST(Decide, BaselinesMeetDeadline) {
  auto fx = make_fixture(4, 3, 0.02);
  for (auto kind : {PolicyKind::qccf, PolicyKind::principle, PolicyKind::same_size,
                    PolicyKind::channel_allocate, PolicyKind::no_quant}) {
    Rng rng(6);
    const auto out = decide(kind, fx.cfg, fx.state, 10, rng);
    const auto costs = price_decision(out.decision, fx.cfg.wireless, fx.cfg.profiles,
                                      fx.state.gains, fx.cfg.model_dim);
    for (int i = 0; i < out.decision.clients(); ++i) {
      if (!out.decision.scheduled(i)) continue;
      EXPECT_LE(costs[i].latency(), fx.cfg.t_max * (1.0 + 1e-9)) << to_string(kind);
    }
  }
}

TEST(Pricing, MatchesComponentModels) {
  auto fx = make_fixture(2, 2, 0.05);
  auto d = RoundDecision::empty(2);
  d.participate = {0, 1};
  d.channel = {-1, 1};
  d.bits = {1, 5};
  d.freq_hz = {0.0, 5e8};
  const auto costs = price_decision(d, fx.cfg.wireless, fx.cfg.profiles, fx.state.gains,
                                    fx.cfg.model_dim);
  EXPECT_EQ(costs[0].energy(), 0.0);
  const double rate = channel_rate(fx.state.gains(1, 1), fx.cfg.wireless);
  const double t_com = payload_bits(fx.cfg.model_dim, 5) / rate;
  EXPECT_DOUBLE_EQ(costs[1].rate_bps, rate);
  EXPECT_DOUBLE_EQ(costs[1].t_com, t_com);
  EXPECT_DOUBLE_EQ(costs[1].e_com, fx.cfg.wireless.tx_power_w * t_com);
  EXPECT_DOUBLE_EQ(costs[1].e_cmp, compute_energy(fx.cfg.profiles[1], 5e8));
  d.full_precision = true;
  EXPECT_EQ(upload_bits(d, 1, fx.cfg.model_dim), 32u * fx.cfg.model_dim + 32u);
}

TEST(SameSize, PricesEveryClientAtLargestDataset) {
  auto fx = make_fixture(3, 3, 0.05);
  const Chromosome all = {0, 1, 2};
  std::vector<InnerChoice> inner;
  const auto v = evaluate_allocation(PolicyKind::same_size, fx.cfg, fx.state, 0, all, &inner);
  ASSERT_TRUE(v.feasible);
  // Equal sizes give equal weights, so only the channel separates the clients.
  auto fx2 = fx;
  for (auto& p : fx2.cfg.profiles) p.dataset_size = 1200;
  const auto v2 = evaluate_allocation(PolicyKind::qccf, fx2.cfg, fx2.state, 0, all);
  EXPECT_DOUBLE_EQ(v.objective, v2.objective);
}

}  // namespace
}  // namespace qccf
