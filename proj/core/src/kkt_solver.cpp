// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/kkt_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qccf/error.hpp"

namespace qccf {
namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kTol = 1e-9;
// Relative slack allowed when S(q) is compared against f_max.
constexpr double kFreqSlack = 1e-12;

bool geq(double a, double b) {
  return a >= b - kTol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool greater(double a, double b) {
  return a > b + kTol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Terms {
  double rate;      // v
  double dim;       // Z
  double cycles;    // tau_e * gamma * D
  double alpha;
  double p_v;       // p V
  double coupling;  // v w L (lambda2 - eps2) theta^2
  double v;
  double f_min;
  double f_max;

  explicit Terms(const ClientSolveInput& in)
      : rate(in.client.rate_bps),
        dim(static_cast<double>(in.client.model_dim)),
        cycles(compute_cycles(in.client.profile)),
        alpha(in.client.profile.energy_coeff),
        p_v(in.client.tx_power_w * in.params.v),
        coupling(in.client.rate_bps * in.client.weight * in.params.smoothness *
                 (in.lambda2 - in.params.eps2) * in.client.theta_max *
                 in.client.theta_max),
        v(in.params.v),
        f_min(in.client.profile.f_min_hz),
        f_max(in.client.profile.f_max_hz) {}

  // Marginal quantization benefit: v w L (lambda2 - eps2) theta^2 2^q ln2 / (4 (2^q - 1)^3).
  double marginal(double q) const {
    const double y = std::exp2(q);
    const double x = y - 1.0;
    return coupling * y * kLn2 / (4.0 * x * x * x);
  }

  double marginal_derivative(double q) const {
    const double y = std::exp2(q);
    const double x = y - 1.0;
    return -coupling * (2.0 * y + 1.0) * y * kLn2 * kLn2 / (4.0 * x * x * x * x);
  }
};

double relaxed_j3(double f, double q, const ClientSolveInput& in) {
  return per_client_J3(f, q, in.client, in.lambda2, in.params);
}

}  // namespace

std::string_view to_string(SolveCase c) noexcept {
  switch (c) {
    case SolveCase::case1: return "case1";
    case SolveCase::case2: return "case2";
    case SolveCase::case3: return "case3";
    case SolveCase::case4: return "case4";
    case SolveCase::case5: return "case5";
    case SolveCase::monotone: return "monotone";
    case SolveCase::oracle: return "oracle";
    case SolveCase::rule: return "rule";
    case SolveCase::infeasible: return "infeasible";
  }
  return "unknown";
}

double latency_slack_bits(double bits, const ClientSolveInput& in) {
  const double z = static_cast<double>(in.client.model_dim);
  return in.client.rate_bps * in.t_max - (z * bits + z + 32.0);
}

std::optional<double> best_frequency_given_q(double bits, const ClientSolveInput& in) {
  const double slack = latency_slack_bits(bits, in);
  if (!(slack > 0.0)) return std::nullopt;
  const auto& prof = in.client.profile;
  const double needed = in.client.rate_bps * compute_cycles(prof) / slack;
  if (needed > prof.f_max_hz * (1.0 + kFreqSlack)) return std::nullopt;
  return std::clamp(needed, prof.f_min_hz, prof.f_max_hz);
}

double cubic_root_case2(double a) {
  if (a <= 27.0 / 4.0) {
    const double disc = std::sqrt(std::max(0.0, 0.25 - a / 27.0));
    return std::cbrt(a) * (std::cbrt(0.5 + disc) + std::cbrt(0.5 - disc));
  }
  const double phi = std::acos(1.5 * std::sqrt(3.0 / a)) / 3.0;
  return 2.0 * std::sqrt(a / 3.0) * std::cos(phi);
}

namespace {

// Closed-form candidate with the smallest J3 among those whose prerequisites
// hold; nullopt if none does. Assumes lambda2 > eps2 and q = 1 feasible.
std::optional<RelaxedSolution> closed_form(const ClientSolveInput& in, double s1) {
  const Terms t(in);
  struct Candidate {
    bool ok = false;
    double q = 1.0;
    double f = 0.0;
  };
  std::array<Candidate, 5> cand{};

  // Case 1: q pinned at 1.
  if (geq(t.p_v, t.marginal(1.0))) cand[0] = {true, 1.0, s1};

  // Case 2: f = f_min with slack latency; (2^q - 1) solves a depressed cubic.
  if (t.coupling > 0.0) {
    const double a4 = t.coupling * kLn2 / (4.0 * t.p_v);
    const double q2 = std::log2(1.0 + cubic_root_case2(a4));
    const double latency = t.cycles / t.f_min +
                           (t.dim * q2 + t.dim + 32.0) / t.rate;
    if (greater(q2, 1.0) && latency < in.t_max) cand[1] = {true, q2, t.f_min};
  }

  // Cases 3 and 4: latency tight at a frequency bound.
  auto tight_q = [&](double f) {
    return (t.rate * in.t_max - t.rate * t.cycles / f - t.dim - 32.0) / t.dim;
  };
  {
    const double q3 = tight_q(t.f_max);
    if (greater(q3, 1.0)) {
      const double k1 = t.marginal(q3) - t.p_v;
      if (geq(k1, 0.0) && geq(k1, 2.0 * t.v * t.alpha * std::pow(t.f_max, 3))) {
        cand[2] = {true, q3, t.f_max};
      }
    }
    const double q4 = tight_q(t.f_min);
    if (greater(q4, 1.0)) {
      const double k1 = t.marginal(q4) - t.p_v;
      if (geq(k1, 0.0) && geq(2.0 * t.v * t.alpha * std::pow(t.f_min, 3), k1)) {
        cand[3] = {true, q4, t.f_min};
      }
    }
  }

  // Case 5: one Newton step on p + 2 alpha S(q)^3 = K(q) / V from the last level.
  {
    double q0 = std::clamp(static_cast<double>(in.q_last), 1.0,
                           static_cast<double>(in.q_cap));
    const double q_edge = (t.rate * in.t_max - t.dim - 32.0) / t.dim;
    if (q0 >= q_edge) q0 = q_edge - 1.0;  // anchor must leave latency slack
    if (q0 >= 1.0) {
      const double slack = latency_slack_bits(q0, in);
      const double vc = t.rate * t.cycles;
      const double s = vc / slack;
      const double h = t.marginal(q0) / t.v - 2.0 * t.alpha * s * s * s - t.p_v / t.v;
      const double dh = -t.marginal_derivative(q0) / t.v +
                        6.0 * t.alpha * t.dim * vc * vc * vc / std::pow(slack, 4);
      double q5 = q0 + h / dh;
      q5 = std::clamp(q5, 1.0, static_cast<double>(in.q_cap));
      const double slack5 = latency_slack_bits(q5, in);
      if (greater(q5, 1.0) && slack5 > 0.0) {
        const double f5 = vc / slack5;
        if (greater(f5, t.f_min) && greater(t.f_max, f5)) cand[4] = {true, q5, f5};
      }
    }
  }

  RelaxedSolution best;
  double best_j = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (!cand[k].ok) continue;
    const double j = relaxed_j3(cand[k].f, cand[k].q, in);
    if (j < best_j) {
      best_j = j;
      best = {cand[k].q, cand[k].f, static_cast<SolveCase>(k)};
    }
  }
  if (best.tag == SolveCase::infeasible) return std::nullopt;
  return best;
}

}  // namespace

RelaxedSolution solve_client_relaxed(const ClientSolveInput& in) {
  if (!(in.lambda2 > in.params.eps2)) {
    throw Error(Errc::nonconvex_regime, "lambda2 <= eps2");
  }
  const auto s1 = best_frequency_given_q(1.0, in);
  if (!s1) throw Error(Errc::infeasible, "deadline missed even at q = 1, f = f_max");
  if (auto best = closed_form(in, *s1)) return *best;
  const auto grid = oracle_grid_solve(in, in.q_cap);
  return {static_cast<double>(grid.bits), grid.freq_hz, SolveCase::oracle};
}

ClientSolveOutput round_to_integer(double relaxed_bits, const ClientSolveInput& in) {
  const double q = std::clamp(relaxed_bits, 1.0, static_cast<double>(in.q_cap));
  const std::array<int, 2> picks = {static_cast<int>(std::floor(q)),
                                    static_cast<int>(std::ceil(q))};
  ClientSolveOutput out;
  out.relaxed_bits = relaxed_bits;
  double best_j = std::numeric_limits<double>::infinity();
  for (int bits : picks) {
    const auto f = best_frequency_given_q(bits, in);
    if (!f) continue;
    const double j = relaxed_j3(*f, bits, in);
    if (j < best_j) {  // strict: floor is tried first and keeps ties
      best_j = j;
      out.bits = bits;
      out.freq_hz = *f;
      out.j3 = j;
      out.tag = SolveCase::case1;  // placeholder, caller sets the real tag
    }
  }
  if (!std::isfinite(best_j)) {
    throw Error(Errc::infeasible, "neither floor nor ceil meets the deadline");
  }
  return out;
}

ClientSolveOutput oracle_grid_solve(const ClientSolveInput& in, int q_cap,
                                    int grid_points) {
  const auto& prof = in.client.profile;
  const double cycles = compute_cycles(prof);
  const double z = static_cast<double>(in.client.model_dim);
  auto latency = [&](double f, int q) {
    return cycles / f + (z * q + z + 32.0) / in.client.rate_bps;
  };
  auto fits = [&](double f, int q) { return latency(f, q) <= in.t_max; };

  grid_points = std::max(grid_points, 2);
  ClientSolveOutput out;
  double best_j = std::numeric_limits<double>::infinity();
  auto offer = [&](double f, int q) {
    const double j = relaxed_j3(f, q, in);
    if (j < best_j) {
      best_j = j;
      out.bits = q;
      out.freq_hz = f;
      out.j3 = j;
      out.relaxed_bits = q;
      out.tag = SolveCase::oracle;
    }
  };

  const double step = (prof.f_max_hz - prof.f_min_hz) / (grid_points - 1);
  for (int q = 1; q <= q_cap; ++q) {
    double prev_bad = -1.0;
    bool found = false;
    for (int k = 0; k < grid_points; ++k) {
      const double f = k + 1 == grid_points ? prof.f_max_hz : prof.f_min_hz + k * step;
      if (!fits(f, q)) {
        prev_bad = f;
        continue;
      }
      offer(f, q);
      if (!found && prev_bad > 0.0) {
        // Refine the deadline boundary between the last miss and first fit.
        double lo = prev_bad;
        double hi = f;
        for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (fits(mid, q) ? hi : lo) = mid;
        }
        offer(hi, q);
      }
      found = true;
    }
  }
  if (!std::isfinite(best_j)) out.tag = SolveCase::infeasible;
  return out;
}

ClientSolveOutput solve_client(const ClientSolveInput& in) {
  ClientSolveOutput out;
  const auto s1 = best_frequency_given_q(1.0, in);
  if (!s1) {
    out.tag = SolveCase::infeasible;
    return out;
  }
  if (!(in.lambda2 > in.params.eps2)) {
    // J3 is nondecreasing in q here: the quantization term rewards coarse
    // levels and both energy terms grow with q.
    out.bits = 1;
    out.freq_hz = *s1;
    out.j3 = relaxed_j3(*s1, 1.0, in);
    out.relaxed_bits = 1.0;
    out.tag = SolveCase::monotone;
    return out;
  }
  const auto relaxed = closed_form(in, *s1);
  if (!relaxed) return oracle_grid_solve(in, in.q_cap);
  out = round_to_integer(relaxed->bits, in);
  out.tag = relaxed->tag;
  return out;
}

}  // namespace qccf
