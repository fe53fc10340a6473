// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-client (frequency, quantization level) subproblem. The continuous
// relaxation is solved in closed form by checking the five KKT activity
// patterns of the latency, frequency-box and q >= 1 constraints; the integer
// answer is the better of floor/ceil of the relaxed level. A grid search is
// kept as an independent reference.

#pragma once

#include <optional>
#include <string_view>

#include "qccf/lyapunov.hpp"

namespace qccf {

enum class SolveCase {
  case1,       // q = 1
  case2,       // f = f_min, latency slack, interior q (cubic root)
  case3,       // f = f_max, latency tight
  case4,       // f = f_min, latency tight
  case5,       // interior f, latency tight (one Newton step)
  monotone,    // quantization queue below target: q = 1 is optimal
  oracle,      // no prerequisite held; grid search answered
  rule,        // level fixed by a baseline rule, f = S(q)
  infeasible,
};

std::string_view to_string(SolveCase c) noexcept;

struct ClientSolveInput {
  ClientContext client;
  double lambda2 = 0.0;
  LyapunovParams params;
  double t_max = 0.05;
  int q_last = 8;  // Newton anchor: the client's last chosen level
  int q_cap = kMaxQuantizationBits;
};

struct RelaxedSolution {
  double bits = 1.0;
  double freq_hz = 0.0;
  SolveCase tag = SolveCase::infeasible;
};

struct ClientSolveOutput {
  int bits = 1;
  double freq_hz = 0.0;
  SolveCase tag = SolveCase::infeasible;
  double j3 = 0.0;
  double relaxed_bits = 1.0;
};

/// Upload bits left in the latency budget at f = infinity: v T - (Z q + Z + 32).
double latency_slack_bits(double bits, const ClientSolveInput& in);

/// Smallest feasible frequency for level q: max{f_min, v c / (v T - Z q - Z - 32)}.
/// nullopt when no frequency in [f_min, f_max] meets the latency budget.
std::optional<double> best_frequency_given_q(double bits, const ClientSolveInput& in);

/// Real root of x^3 - a x - a = 0 (a > 0), via radicals or the
/// trigonometric form depending on the discriminant sign.
double cubic_root_case2(double a);

/// Closed-form relaxed solution. Requires lambda2 > eps2, otherwise throws
/// Error(nonconvex_regime); throws Error(infeasible) when even q = 1 at
/// f_max misses the deadline. Falls back to the grid (tag oracle) when no
/// case prerequisite holds.
RelaxedSolution solve_client_relaxed(const ClientSolveInput& in);

/// Better of floor/ceil of a relaxed level at f = S(q); floor wins ties.
/// Throws Error(infeasible) when both candidates miss the deadline.
ClientSolveOutput round_to_integer(double relaxed_bits, const ClientSolveInput& in);

/// Brute force over q in [1, q_cap] and `grid_points` frequencies, with the
/// latency boundary refined by bisection. Tag infeasible when nothing fits.
ClientSolveOutput oracle_grid_solve(const ClientSolveInput& in, int q_cap = kMaxQuantizationBits,
                                    int grid_points = 128);

/// Hot-path entry point: never throws for infeasible or nonconvex inputs,
/// reporting them through the tag instead.
ClientSolveOutput solve_client(const ClientSolveInput& in);

}  // namespace qccf
