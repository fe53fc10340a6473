// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Virtual queues for the two long-term learning constraints (participation
// pressure and quantization error) and the drift-plus-penalty objective.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qccf/decision.hpp"
#include "qccf/fl_core.hpp"
#include "qccf/wireless.hpp"

namespace qccf {

struct LyapunovParams {
  double eta = 0.05;
  double smoothness = 1.0;  // L
  int tau = 6;              // local updates per round
  int tau_e = 2;            // local epochs per round
  double eps1 = 0.0;
  double eps2 = 0.0;
  double v = 1.0;           // penalty weight on energy

  /// Throws Error(premise_violation) unless 2 eta^2 tau^2 L^2 < 1 and
  /// Error(invalid_config) unless V > 0.
  void validate() const;

  double a1() const noexcept;
  double a2() const noexcept;
};

double coefficient_a1(double eta, double smoothness, int tau) noexcept;
double coefficient_a2(double eta, double smoothness, int tau) noexcept;

struct QueueState {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// max{arrival + lambda - eps, 0}.
double update_queue(double lambda, double arrival, double eps) noexcept;

/// D_i / sum_j D_j over all clients.
std::vector<double> global_weights(std::span<const int> sizes);
/// a_i D_i / sum_j a_j D_j; all zero for an empty round.
std::vector<double> participant_weights(std::span<const std::uint8_t> participate,
                                        std::span<const int> sizes);

/// Z L theta^2 / (8 (2^q - 1)^2), zero for full-precision uploads.
double quantization_error_term(std::size_t model_dim, double smoothness,
                               double theta_max, double bits);

/// Arrival of the participation queue for a decision.
double participation_arrival(const RoundDecision& d, std::span<const int> sizes,
                             std::span<const LocalStats> stats,
                             const LyapunovParams& params);

/// Arrival of the quantization queue for a decision.
double quantization_arrival(const RoundDecision& d, std::span<const int> sizes,
                            std::span<const LocalStats> stats,
                            const LyapunovParams& params, std::size_t model_dim);

double update_lambda1(const QueueState& q, const RoundDecision& d,
                      std::span<const int> sizes,
                      std::span<const LocalStats> stats,
                      const LyapunovParams& params);
double update_lambda2(const QueueState& q, const RoundDecision& d,
                      std::span<const int> sizes,
                      std::span<const LocalStats> stats,
                      const LyapunovParams& params, std::size_t model_dim);

/// Drift-plus-penalty value of a decision (the constant offset is dropped).
/// `energy_j[i]` is client i's computation plus upload energy; ignored for
/// unscheduled clients.
double objective_J(const QueueState& q, const RoundDecision& d,
                   std::span<const int> sizes, std::span<const LocalStats> stats,
                   std::span<const double> energy_j, const LyapunovParams& params,
                   std::size_t model_dim);

/// Everything the per-client subproblem needs about one scheduled client.
struct ClientContext {
  double rate_bps = 0.0;
  double weight = 0.0;  // w_i^n
  double theta_max = 0.0;
  ClientProfile profile;
  double tx_power_w = 0.2;
  std::size_t model_dim = 1;
};

/// Per-client objective in (f, q): quantization pressure + computation
/// energy + the q-dependent part of upload energy. q may be fractional.
/// Throws Error(no_channel) for a zero rate.
double per_client_J3(double f_hz, double bits, const ClientContext& c,
                     double lambda2, const LyapunovParams& params);

}  // namespace qccf
