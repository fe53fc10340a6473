// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "qccf/error.hpp"

namespace qccf {

double coefficient_a1(double eta, double smoothness, int tau) noexcept {
  const double e2l2 = eta * eta * smoothness * smoothness;
  const double t = tau;
  return 2.0 * e2l2 * (2.0 * t * t * t - 3.0 * t * t + t) / (3.0 - 6.0 * e2l2 * t * t);
}

double coefficient_a2(double eta, double smoothness, int tau) noexcept {
  const double e2l2 = eta * eta * smoothness * smoothness;
  const double t = tau;
  return eta * smoothness * t + e2l2 * (t * t - t) / (1.0 - 2.0 * e2l2 * t * t);
}

void LyapunovParams::validate() const {
  if (tau < 1 || tau_e < 1 || tau % tau_e != 0) {
    throw Error(Errc::invalid_config, "tau must be a positive multiple of tau_e");
  }
  if (!(eta >= 0.0) || !(smoothness > 0.0)) {
    throw Error(Errc::invalid_config, "need eta >= 0 and L > 0");
  }
  if (!(2.0 * eta * eta * tau * tau * smoothness * smoothness < 1.0)) {
    throw Error(Errc::premise_violation, "2 eta^2 tau^2 L^2 must be < 1");
  }
  if (!(v > 0.0)) throw Error(Errc::invalid_config, "V must be > 0");
}

double LyapunovParams::a1() const noexcept { return coefficient_a1(eta, smoothness, tau); }
double LyapunovParams::a2() const noexcept { return coefficient_a2(eta, smoothness, tau); }

double update_queue(double lambda, double arrival, double eps) noexcept {
  return std::max(arrival + lambda - eps, 0.0);
}

std::vector<double> global_weights(std::span<const int> sizes) {
  double total = 0.0;
  for (int s : sizes) total += s;
  std::vector<double> w(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) w[i] = sizes[i] / total;
  return w;
}

std::vector<double> participant_weights(std::span<const std::uint8_t> participate,
                                        std::span<const int> sizes) {
  if (participate.size() != sizes.size()) {
    throw Error(Errc::dimension_mismatch, "participation vs sizes");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (participate[i]) total += sizes[i];
  }
  std::vector<double> w(sizes.size(), 0.0);
  if (total == 0.0) return w;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (participate[i]) w[i] = sizes[i] / total;
  }
  return w;
}

double quantization_error_term(std::size_t model_dim, double smoothness,
                               double theta_max, double bits) {
  const double levels = std::exp2(bits) - 1.0;
  return static_cast<double>(model_dim) * smoothness * theta_max * theta_max /
         (8.0 * levels * levels);
}

double participation_arrival(const RoundDecision& d, std::span<const int> sizes,
                             std::span<const LocalStats> stats,
                             const LyapunovParams& params) {
  const auto w = global_weights(sizes);
  const auto wn = participant_weights(d.participate, sizes);
  const double a1 = params.a1();
  const double a2 = params.a2();
  double sum = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double g2 = stats[i].grad_norm_max * stats[i].grad_norm_max;
    const double a = d.participate[i] ? 1.0 : 0.0;
    sum += 4.0 * params.tau * (1.0 - a * w[i]) * g2 + a1 * wn[i] * g2 +
           a2 * wn[i] * stats[i].batch_variance;
  }
  return sum;
}

double quantization_arrival(const RoundDecision& d, std::span<const int> sizes,
                            std::span<const LocalStats> stats,
                            const LyapunovParams& params, std::size_t model_dim) {
  if (d.full_precision) return 0.0;
  const auto wn = participant_weights(d.participate, sizes);
  double sum = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (wn[i] == 0.0) continue;
    sum += wn[i] * quantization_error_term(model_dim, params.smoothness,
                                           stats[i].theta_max, d.bits[i]);
  }
  return sum;
}

double update_lambda1(const QueueState& q, const RoundDecision& d,
                      std::span<const int> sizes,
                      std::span<const LocalStats> stats,
                      const LyapunovParams& params) {
  return update_queue(q.lambda1, participation_arrival(d, sizes, stats, params),
                      params.eps1);
}

double update_lambda2(const QueueState& q, const RoundDecision& d,
                      std::span<const int> sizes,
                      std::span<const LocalStats> stats,
                      const LyapunovParams& params, std::size_t model_dim) {
  return update_queue(q.lambda2,
                      quantization_arrival(d, sizes, stats, params, model_dim),
                      params.eps2);
}

double objective_J(const QueueState& q, const RoundDecision& d,
                   std::span<const int> sizes, std::span<const LocalStats> stats,
                   std::span<const double> energy_j, const LyapunovParams& params,
                   std::size_t model_dim) {
  double energy = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (d.participate[i]) energy += energy_j[i];
  }
  return (q.lambda1 - params.eps1) * participation_arrival(d, sizes, stats, params) +
         (q.lambda2 - params.eps2) *
             quantization_arrival(d, sizes, stats, params, model_dim) +
         params.v * energy;
}

double per_client_J3(double f_hz, double bits, const ClientContext& c,
                     double lambda2, const LyapunovParams& params) {
  if (!(c.rate_bps > 0.0)) {
    throw Error(Errc::no_channel, "J3 evaluated for a client without a channel");
  }
  const double quant = (lambda2 - params.eps2) * c.weight *
                       quantization_error_term(c.model_dim, params.smoothness,
                                               c.theta_max, bits);
  const double compute = params.v * compute_cycles(c.profile) *
                         c.profile.energy_coeff * f_hz * f_hz;
  const double upload = c.tx_power_w * params.v *
                        static_cast<double>(c.model_dim) * bits / c.rate_bps;
  return quant + compute + upload;
}

}  // namespace qccf
