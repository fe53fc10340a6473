// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/kkt_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "qccf/error.hpp"
#include "qccf/rng.hpp"
#include "qccf/simctl.hpp"

namespace qccf {
namespace {

ClientSolveInput base_input() {
  ClientSolveInput in;
  in.client.rate_bps = 1e7;
  in.client.weight = 0.5;
  in.client.theta_max = 0.3;
  in.client.tx_power_w = 0.2;
  in.client.model_dim = 8000;
  in.params.v = 1.0;
  in.params.eps2 = 1.0;
  in.lambda2 = 2.0;
  in.t_max = 0.05;
  return in;
}

double coupling(const ClientSolveInput& in) {
  return in.client.rate_bps * in.client.weight * in.params.smoothness *
         (in.lambda2 - in.params.eps2) * in.client.theta_max * in.client.theta_max;
}

void set_coupling(ClientSolveInput& in, double k) {
  in.lambda2 = in.params.eps2 + k / (in.client.rate_bps * in.client.weight *
                                     in.params.smoothness * in.client.theta_max *
                                     in.client.theta_max);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (f(c) < f(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

TEST(MinFrequency, SlackLatencyHandArithmetic) {
  auto in = base_input();
  EXPECT_DOUBLE_EQ(latency_slack_bits(4, in), 5e5 - 40032.0);
  const auto f = best_frequency_given_q(4, in);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(*f, 2e8);
  in.t_max = 1e3;
  EXPECT_EQ(*best_frequency_given_q(4, in), in.client.profile.f_min_hz);
}

TEST(MinFrequency, VanishingSlackIsInfeasible) {
  auto in = base_input();
  in.t_max = (8000.0 * 5 + 32.0) / in.client.rate_bps;  // slack exactly 0 at q = 4
  EXPECT_FALSE(best_frequency_given_q(4, in).has_value());
  in.t_max *= 1.0 + 1e-9;  // tiny slack needs f far above f_max
  EXPECT_FALSE(best_frequency_given_q(4, in).has_value());
}

TEST(CubicRoot, SolvesDepressedCubic) {
  for (double a : {0.01, 1.0, 6.75, 7.0, 50.0, 1e6}) {
    const double x = cubic_root_case2(a);
    EXPECT_NEAR(x * x * x, a * x + a, 1e-9 * std::max(1.0, a * x)) << "a " << a;
    EXPECT_GT(x, 0.0);
  }
}

TEST(Solver, CheapEnergyPinsLevelOne) {
  auto in = base_input();
  // p V far above the marginal benefit at q = 1.
  set_coupling(in, 1e-3);
  const auto out = solve_client(in);
  EXPECT_EQ(out.tag, SolveCase::case1);
  EXPECT_EQ(out.bits, 1);
  EXPECT_DOUBLE_EQ(out.freq_hz, *best_frequency_given_q(1, in));
  EXPECT_EQ(oracle_grid_solve(in).bits, 1);
}

TEST(Solver, SlackLatencyFollowsCubicRoot) {
  auto in = base_input();
  in.t_max = 1.0;
  set_coupling(in, 1e9);
  const auto relaxed = solve_client_relaxed(in);
  EXPECT_EQ(relaxed.tag, SolveCase::case2);
  EXPECT_EQ(relaxed.freq_hz, in.client.profile.f_min_hz);
  const double fmin = in.client.profile.f_min_hz;
  const double q_star = golden_min(
      [&](double q) { return per_client_J3(fmin, q, in.client, in.lambda2, in.params); },
      1.0, 32.0);
  EXPECT_NEAR(relaxed.bits, q_star, 1e-3);
}

TEST(Solver, NewtonStepIsFixedAtStationaryAnchor) {
  auto in = base_input();
  in.q_last = 5;
  const double z = 8000.0;
  const double cycles = compute_cycles(in.client.profile);
  in.t_max = (z * 6 + 32.0 + 4.8e4) / in.client.rate_bps;
  const double slack = latency_slack_bits(5, in);
  const double s = in.client.rate_bps * cycles / slack;
  ASSERT_GT(s, in.client.profile.f_min_hz);
  ASSERT_LT(s, in.client.profile.f_max_hz);
  // Choose the queue so that the stationarity condition holds exactly at q = 5.
  const double alpha = in.client.profile.energy_coeff;
  const double pv = in.client.tx_power_w * in.params.v;
  const double y = 32.0;
  const double x = 31.0;
  const double k = (2.0 * alpha * s * s * s * in.params.v + pv) * 4.0 * x * x * x /
                   (y * std::numbers::ln2);
  set_coupling(in, k);
  ASSERT_NEAR(coupling(in), k, 1e-6 * k);
  const auto relaxed = solve_client_relaxed(in);
  EXPECT_EQ(relaxed.tag, SolveCase::case5);
  EXPECT_NEAR(relaxed.bits, 5.0, 1e-6);
  EXPECT_NEAR(relaxed.freq_hz, s, 1e-3 * s);
}

TEST(Solver, BalancedQueueTakesCoarsestLevel) {
  auto in = base_input();
  in.lambda2 = in.params.eps2;
  const auto out = solve_client(in);
  EXPECT_EQ(out.tag, SolveCase::monotone);
  EXPECT_EQ(out.bits, 1);
  try {
    solve_client_relaxed(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::nonconvex_regime);
  }
}

TEST(Solver, ImpossibleDeadlineIsInfeasibleOnBothPaths) {
  auto in = base_input();
  in.t_max = 1e-4;
  EXPECT_EQ(solve_client(in).tag, SolveCase::infeasible);
  EXPECT_EQ(oracle_grid_solve(in).tag, SolveCase::infeasible);
  EXPECT_THROW(round_to_integer(2.5, in), Error);
}

TEST(Rounding, IntegerInputIsKept) {
  auto in = base_input();
  set_coupling(in, 1e7);
  EXPECT_EQ(round_to_integer(3.0, in).bits, 3);
}

TEST(Rounding, PicksCheaperNeighbour) {
  auto in = base_input();
  set_coupling(in, 1e7);
  const auto out = round_to_integer(3.4, in);
  const double j3 = per_client_J3(*best_frequency_given_q(3, in), 3, in.client, in.lambda2,
                                  in.params);
  const double j4 = per_client_J3(*best_frequency_given_q(4, in), 4, in.client, in.lambda2,
                                  in.params);
  EXPECT_EQ(out.bits, j3 <= j4 ? 3 : 4);
  EXPECT_DOUBLE_EQ(out.j3, std::min(j3, j4));
}

TEST(Solver, ClosedFormNeverLosesToOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 120; ++trial) {
    const auto in = random_solve_instance(trial, rng);
    const auto closed = solve_client(in);
    const auto grid = oracle_grid_solve(in);
    ASSERT_EQ(closed.tag == SolveCase::infeasible, grid.tag == SolveCase::infeasible);
    if (grid.tag == SolveCase::infeasible) continue;
    EXPECT_LE(closed.j3, grid.j3 + 1e-4 * std::abs(grid.j3)) << "trial " << trial;
    EXPECT_GE(grid.j3, closed.j3 - 1e-6 * std::abs(closed.j3)) << "trial " << trial;
  }
}

TEST(OracleSuite, CoversEveryCase) {
  const auto report = run_kkt_oracle_suite(300, 5);
  for (int c = 0; c < 5; ++c) EXPECT_GE(report.case_counts[c], 20) << "case " << c + 1;
  EXPECT_GE(report.bits_match, static_cast<int>(0.99 * report.feasible));
  EXPECT_EQ(report.objective_violations, 0);
}

}  // namespace
}  // namespace qccf
