// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Convergence-bound evaluation: the right-hand side of the accumulated
// gradient bound over rounds, the local-drift bound, and a small
// least-squares federation on which both are checked empirically.

#pragma once

#include <cstdint>
#include <vector>

namespace qccf {

/// One client in one round.
struct ClientRoundBound {
  bool participate = true;
  double grad_bound = 0.0;  // G
  double sigma2 = 0.0;      // sigma^2
  double theta_max = 0.0;
  double bits = 8.0;        // q; use a large value to switch quantization off
};

struct BoundInputs {
  double eta = 0.01;
  double smoothness = 1.0;
  int tau = 4;
  std::size_t model_dim = 1;
  std::vector<int> sizes;                           // D_i, all clients
  std::vector<std::vector<ClientRoundBound>> rounds;  // [round][client]
  double loss_start = 0.0;                          // F(theta^0)
  double loss_end = 0.0;                            // F(theta^N)
};

struct RoundBoundTerms {
  double descent = 0.0;
  double quantization = 0.0;
  double variance = 0.0;  // both sigma/G terms scaled by eta
  double participation = 0.0;
  double total() const noexcept { return descent + quantization + variance + participation; }
};

/// Throws Error(premise_violation) unless 2 eta^2 tau^2 L^2 < 1.
RoundBoundTerms theorem_round_terms(const BoundInputs& in);
double theorem_round_rhs(const BoundInputs& in);

/// (eta^2 m sum w sigma^2 + 2 eta^2 m^2 sum w G^2) / (1 - 2 eta^2 m^2 L^2).
/// Throws Error(premise_violation) unless 2 eta^2 m^2 L^2 < 1.
double lemma2_rhs(double eta, double smoothness, int m,
                  const std::vector<double>& weights,
                  const std::vector<double>& sigma2,
                  const std::vector<double>& grad_bound);

struct ToyHarnessConfig {
  int model_dim = 8;
  int clients = 3;
  int tau = 4;
  int rounds = 5;
  int samples_per_client = 24;
  int batch_size = 6;
  int bits = 3;
  double eta = 0.05;
  int seeds = 1000;
  std::uint64_t seed = 7;
};

struct ToyHarnessReport {
  double smoothness = 0.0;             // measured L of the toy losses
  std::vector<double> lemma_lhs;       // index m = 0..tau, seed-averaged
  std::vector<double> lemma_rhs;
  double theorem_lhs = 0.0;            // sum_n sum_m ||grad F(psi)||^2
  double theorem_rhs = 0.0;
  bool lemma_holds = false;            // lhs <= rhs * (1 + slack) at every m
  bool theorem_holds = false;
};

/// Full-participation least-squares federation with stochastic batches and
/// quantized uploads; G and sigma^2 are measured exactly per iterate.
ToyHarnessReport run_bound_harness(const ToyHarnessConfig& cfg, double slack = 0.05);

}  // namespace qccf
