// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/lyapunov.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qccf/error.hpp"

namespace qccf {
namespace {

RoundDecision schedule(std::vector<std::uint8_t> participate, int bits) {
  auto d = RoundDecision::empty(static_cast<int>(participate.size()));
  d.participate = std::move(participate);
  for (int i = 0; i < d.clients(); ++i) {
    d.bits[i] = bits;
    d.channel[i] = d.scheduled(i) ? i : -1;
  }
  return d;
}

TEST(Queue, UpdateRule) {
  EXPECT_EQ(update_queue(5.0, 2.0, 2.0), 5.0);
  EXPECT_EQ(update_queue(5.0, 3.0, 4.0), 4.0);
  EXPECT_EQ(update_queue(1.0, 0.0, 4.0), 0.0);
}

TEST(Queue, ZeroStatisticsDrainByTarget) {
  LyapunovParams p;
  p.eps1 = 2.0;
  p.eps2 = 1.5;
  const std::vector<int> sizes = {10, 30};
  const std::vector<LocalStats> stats(2);
  const auto d = schedule({1, 1}, 4);
  EXPECT_EQ(update_lambda1({5.0, 0.0}, d, sizes, stats, p), 3.0);
  EXPECT_EQ(update_lambda2({0.0, 1.0}, d, sizes, stats, p, 100), 0.0);
}

TEST(Arrivals, QuantizationHandArithmetic) {
  LyapunovParams p;
  const std::vector<int> sizes = {7};
  const std::vector<LocalStats> stats = {{0.0, 0.0, 2.0}};
  EXPECT_DOUBLE_EQ(quantization_arrival(schedule({1}, 1), sizes, stats, p, 1), 0.5);
  EXPECT_LT(quantization_arrival(schedule({1}, 30), sizes, stats, p, 1), 1e-17);
  EXPECT_EQ(quantization_arrival(schedule({0}, 1), sizes, stats, p, 1), 0.0);
}

TEST(Arrivals, ParticipationMatchesDirectSum) {
  LyapunovParams p;
  p.eta = 0.05;
  p.tau = 6;
  const std::vector<int> sizes = {100, 300};
  const std::vector<LocalStats> stats = {{2.0, 0.5, 1.0}, {1.0, 0.25, 1.0}};
  const auto d = schedule({0, 1}, 3);
  // Client 0 idle: 4 tau G^2. Client 1 alone: 4 tau (1 - 0.75) G^2 + A1 G^2 + A2 s^2.
  const double expect = 4.0 * 6 * 4.0 + 4.0 * 6 * 0.25 * 1.0 + p.a1() * 1.0 + p.a2() * 0.25;
  EXPECT_NEAR(participation_arrival(d, sizes, stats, p), expect, 1e-12);
}

TEST(Coefficients, SmallStepLimit) {
  // With eta -> 0: A1 ~ 2/3 eta^2 L^2 (2t^3 - 3t^2 + t), A2 ~ eta L t.
  const double eta = 1e-5;
  EXPECT_NEAR(coefficient_a1(eta, 1.0, 6) / (eta * eta), 2.0 / 3.0 * (432 - 108 + 6), 1e-4);
  EXPECT_NEAR(coefficient_a2(eta, 1.0, 6) / eta, 6.0, 1e-3);
  EXPECT_EQ(coefficient_a1(0.0, 1.0, 6), 0.0);
}

TEST(Params, Validation) {
  LyapunovParams p;
  EXPECT_NO_THROW(p.validate());
  p.eta = 0.2;  // 2 * 0.04 * 36 > 1
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::premise_violation);
  }
  p.eta = 0.05;
  p.tau = 5;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Objective, EmptyRoundIsPurePenalty) {
  LyapunovParams p;
  p.eps1 = 1.0;
  p.v = 3.0;
  const std::vector<int> sizes = {10, 20};
  const std::vector<LocalStats> stats = {{1.0, 9.0, 1.0}, {2.0, 9.0, 1.0}};
  const std::vector<double> energy = {5.0, 5.0};
  const auto d = schedule({0, 0}, 4);
  const double j = objective_J({4.0, 7.0}, d, sizes, stats, energy, p, 50);
  EXPECT_DOUBLE_EQ(j, (4.0 - 1.0) * 4.0 * p.tau * (1.0 + 4.0));
}

TEST(Objective, SingleClientHandSum) {
  LyapunovParams p;
  p.eps1 = 0.5;
  p.eps2 = 0.25;
  p.v = 2.0;
  const std::vector<int> sizes = {40};
  const std::vector<LocalStats> stats = {{1.5, 0.4, 0.8}};
  const std::vector<double> energy = {0.3};
  const auto d = schedule({1}, 2);
  const double g2 = 2.25;
  const double arr1 = p.a1() * g2 + p.a2() * 0.4;  // w = 1 removes the idle term
  const double arr2 = 10.0 * 1.0 * 0.64 / (8.0 * 9.0);
  const double expect = (3.0 - 0.5) * arr1 + (1.0 - 0.25) * arr2 + 2.0 * 0.3;
  EXPECT_NEAR(objective_J({3.0, 1.0}, d, sizes, stats, energy, p, 10), expect, 1e-12);
}

TEST(Objective, ZeroPenaltyWeightIgnoresEnergy) {
  LyapunovParams p;
  p.v = 0.0;
  const std::vector<int> sizes = {10};
  const std::vector<LocalStats> stats = {{1.0, 0.1, 1.0}};
  const auto d = schedule({1}, 3);
  const std::vector<double> small = {0.001};
  const std::vector<double> large = {1000.0};
  EXPECT_EQ(objective_J({2.0, 2.0}, d, sizes, stats, small, p, 10),
            objective_J({2.0, 2.0}, d, sizes, stats, large, p, 10));
}

ClientContext table_client() {
  ClientContext c;
  c.rate_bps = 1e7;
  c.weight = 0.5;
  c.theta_max = 0.3;
  c.tx_power_w = 0.2;
  c.model_dim = 8000;
  return c;
}

TEST(ClientObjective, BalancedQueueLeavesEnergyOnly) {
  LyapunovParams p;
  p.eps2 = 2.0;
  p.v = 1.5;
  const auto c = table_client();
  const double f = 5e8;
  const double expect = 1.5 * 2.4e6 * 1e-26 * f * f + 0.2 * 1.5 * 8000 * 4 / 1e7;
  EXPECT_NEAR(per_client_J3(f, 4, c, 2.0, p), expect, 1e-15);
}

TEST(ClientObjective, QueueOnlyDecreasesInBits) {
  LyapunovParams p;
  p.v = 0.0;
  const auto c = table_client();
  double prev = per_client_J3(5e8, 1, c, 10.0, p);
  for (int q = 2; q <= 12; ++q) {
    const double j = per_client_J3(5e8, q, c, 10.0, p);
    EXPECT_LT(j, prev);
    prev = j;
  }
}

TEST(ClientObjective, HandValue) {
  LyapunovParams p;
  p.smoothness = 1.0;
  p.eps2 = 1.0;
  p.v = 1.0;
  const auto c = table_client();
  const double quant = (5.0 - 1.0) * 0.5 * 8000 * 0.09 / (8.0 * 225.0);
  const double compute = 2.4e6 * 1e-26 * 1e18;
  const double upload = 0.2 * 8000 * 4 / 1e7;
  EXPECT_NEAR(per_client_J3(1e9, 4, c, 5.0, p), quant + compute + upload, 1e-15);
}

TEST(ClientObjective, NoChannelThrows) {
  auto c = table_client();
  c.rate_bps = 0.0;
  try {
    per_client_J3(5e8, 4, c, 1.0, LyapunovParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_channel);
  }
}

}  // namespace
}  // namespace qccf
