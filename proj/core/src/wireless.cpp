// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/wireless.hpp"

#include <cmath>
#include <string>

#include "qccf/error.hpp"

namespace qccf {
namespace {

// Frequencies produced by the solvers are compared against the box with this
// relative slack so that round-off in S(q) is not reported as a violation.
constexpr double kFrequencyTolerance = 1e-9;

void check_frequency(const ClientProfile& profile, double f_hz) {
  const double slack = kFrequencyTolerance * profile.f_max_hz;
  if (!(f_hz >= profile.f_min_hz - slack && f_hz <= profile.f_max_hz + slack)) {
    throw Error(Errc::invalid_frequency,
                "f = " + std::to_string(f_hz) + " Hz outside [f_min, f_max]");
  }
}

}  // namespace

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double dbm_per_hz_to_watt_per_hz(double dbm_per_hz) noexcept {
  return db_to_linear(dbm_per_hz) * 1e-3;
}

void WirelessConfig::validate() const {
  if (!(bandwidth_hz > 0.0)) throw Error(Errc::invalid_config, "bandwidth must be > 0");
  if (!(tx_power_w > 0.0)) throw Error(Errc::invalid_config, "tx power must be > 0");
  if (!(noise_psd_w_per_hz > 0.0)) throw Error(Errc::invalid_config, "noise PSD must be > 0");
  if (!(rician_k >= 0.0)) throw Error(Errc::invalid_config, "Rician K must be >= 0");
  if (!(rician_zeta > 0.0)) throw Error(Errc::invalid_config, "Rician zeta must be > 0");
  if (num_channels < 1) throw Error(Errc::invalid_config, "need at least one channel");
}

void ClientProfile::validate() const {
  if (dataset_size < 1) throw Error(Errc::invalid_config, "dataset size must be >= 1");
  if (!(distance_m > 0.0)) throw Error(Errc::invalid_config, "distance must be > 0");
  if (!(f_min_hz > 0.0 && f_min_hz <= f_max_hz)) {
    throw Error(Errc::invalid_config, "need 0 < f_min <= f_max");
  }
  if (local_epochs < 1 || local_updates < 1 || local_updates % local_epochs != 0) {
    throw Error(Errc::invalid_config,
                "local updates must be a positive multiple of local epochs");
  }
  if (!(cycles_per_sample > 0.0) || !(energy_coeff >= 0.0)) {
    throw Error(Errc::invalid_config, "bad computation constants");
  }
}

ChannelGains::ChannelGains(int clients, int channels)
    : clients_(clients),
      channels_(channels),
      gains_(static_cast<std::size_t>(clients) * channels, 0.0) {}

ChannelGains::ChannelGains(int clients, int channels, std::vector<double> gains)
    : clients_(clients), channels_(channels), gains_(std::move(gains)) {
  if (gains_.size() != static_cast<std::size_t>(clients) * channels) {
    throw Error(Errc::dimension_mismatch, "gain matrix size");
  }
}

double path_loss_linear(double distance_m) {
  const double pl_db = 128.1 + 37.6 * std::log10(distance_m / 1000.0);
  return db_to_linear(-pl_db);
}

double rician_power(double k, double zeta, Rng& rng) {
  if (std::isinf(k)) return zeta;
  const double los = std::sqrt(zeta * k / (k + 1.0));
  const double nlos_std = std::sqrt(zeta / (k + 1.0) / 2.0);
  const double re = los + rng.normal(0.0, nlos_std);
  const double im = rng.normal(0.0, nlos_std);
  return re * re + im * im;
}

ChannelGains sample_channels(const WirelessConfig& cfg,
                             std::span<const ClientProfile> profiles, Rng& rng) {
  const int clients = static_cast<int>(profiles.size());
  ChannelGains gains(clients, cfg.num_channels);
  const double device = db_to_linear(cfg.device_gain_db);
  for (int i = 0; i < clients; ++i) {
    const double loss = path_loss_linear(profiles[i].distance_m);
    for (int c = 0; c < cfg.num_channels; ++c) {
      gains(i, c) = device * rician_power(cfg.rician_k, cfg.rician_zeta, rng) * loss;
    }
  }
  return gains;
}

double channel_rate(double gain, const WirelessConfig& cfg) {
  const double snr =
      cfg.tx_power_w * gain / (cfg.bandwidth_hz * cfg.noise_psd_w_per_hz);
  return cfg.bandwidth_hz * std::log2(1.0 + snr);
}

double uplink_rate(std::span<const std::uint8_t> alloc_row,
                   std::span<const double> gains_row, const WirelessConfig& cfg) {
  if (alloc_row.size() != gains_row.size()) {
    throw Error(Errc::dimension_mismatch, "allocation row vs gain row");
  }
  double rate = 0.0;
  for (std::size_t c = 0; c < alloc_row.size(); ++c) {
    if (alloc_row[c] != 0) rate += channel_rate(gains_row[c], cfg);
  }
  return rate;
}

double uplink_latency(double payload_bits, double rate_bps) {
  if (!(rate_bps > 0.0)) {
    throw Error(Errc::no_channel, "uplink latency requested without a channel");
  }
  return payload_bits / rate_bps;
}

double uplink_energy(double tx_power_w, double latency_s) {
  return tx_power_w * latency_s;
}

double compute_cycles(const ClientProfile& profile) noexcept {
  return profile.local_epochs * profile.cycles_per_sample * profile.dataset_size;
}

double compute_latency(const ClientProfile& profile, double f_hz) {
  check_frequency(profile, f_hz);
  return compute_cycles(profile) / f_hz;
}

double compute_energy(const ClientProfile& profile, double f_hz) {
  check_frequency(profile, f_hz);
  return profile.energy_coeff * compute_cycles(profile) * f_hz * f_hz;
}

}  // namespace qccf
