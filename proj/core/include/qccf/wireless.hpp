// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Uplink channel model (device gain x Rician small-scale x log-distance path
// loss), OFDMA rates, and the latency/energy costs of computation and upload.
// All quantities are linear SI units; dB inputs are converted on construction.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qccf/rng.hpp"

namespace qccf {

double db_to_linear(double db) noexcept;
/// dBm/Hz -> W/Hz.
double dbm_per_hz_to_watt_per_hz(double dbm_per_hz) noexcept;

struct WirelessConfig {
  double bandwidth_hz = 1e6;  // per channel
  double tx_power_w = 0.2;
  double noise_psd_w_per_hz = dbm_per_hz_to_watt_per_hz(-174.0);
  double rician_k = 4.0;
  double rician_zeta = 1.0;
  double device_gain_db = 15.0;
  // Only documents the regime the path-loss formula was fitted for.
  double carrier_freq_hz = 2e9;
  int num_channels = 6;

  void validate() const;
};

struct ClientProfile {
  int dataset_size = 1200;
  double distance_m = 250.0;
  double cycles_per_sample = 1000.0;
  double energy_coeff = 1e-26;
  double f_min_hz = 2e8;
  double f_max_hz = 1e9;
  int local_epochs = 2;
  int local_updates = 6;

  void validate() const;
};

/// U x C linear power gains, fixed for one round.
class ChannelGains {
 public:
  ChannelGains() = default;
  ChannelGains(int clients, int channels);
  ChannelGains(int clients, int channels, std::vector<double> gains);

  int clients() const noexcept { return clients_; }
  int channels() const noexcept { return channels_; }
  double operator()(int client, int channel) const {
    return gains_[static_cast<std::size_t>(client) * channels_ + channel];
  }
  double& operator()(int client, int channel) {
    return gains_[static_cast<std::size_t>(client) * channels_ + channel];
  }
  std::span<const double> row(int client) const {
    return {gains_.data() + static_cast<std::size_t>(client) * channels_,
            static_cast<std::size_t>(channels_)};
  }

 private:
  int clients_ = 0;
  int channels_ = 0;
  std::vector<double> gains_;
};

/// Large-scale loss as a linear factor: PL(dB) = 128.1 + 37.6 log10(d / 1 km).
double path_loss_linear(double distance_m);

/// |g|^2 for a (K, zeta) Rician channel with E|g|^2 = zeta. K = +inf gives zeta.
double rician_power(double k, double zeta, Rng& rng);

ChannelGains sample_channels(const WirelessConfig& cfg,
                             std::span<const ClientProfile> profiles, Rng& rng);

/// Rate of one channel: B log2(1 + p h / (B N0)).
double channel_rate(double gain, const WirelessConfig& cfg);

/// Sum of channel rates over the channels marked 1 in alloc_row.
double uplink_rate(std::span<const std::uint8_t> alloc_row,
                   std::span<const double> gains_row, const WirelessConfig& cfg);

/// payload / rate. Throws Error(no_channel) for rate <= 0.
double uplink_latency(double payload_bits, double rate_bps);
double uplink_energy(double tx_power_w, double latency_s);

/// tau_e * gamma * D / f. Throws Error(invalid_frequency) outside [f_min, f_max].
double compute_latency(const ClientProfile& profile, double f_hz);
/// tau_e * alpha * gamma * D * f^2.
double compute_energy(const ClientProfile& profile, double f_hz);

/// Total local work in cycles, tau_e * gamma * D.
double compute_cycles(const ClientProfile& profile) noexcept;

}  // namespace qccf
