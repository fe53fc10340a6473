// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace qccf {

/// Per-round control variables. The channel allocation matrix is stored as
/// one channel index per client (-1 = unscheduled), which encodes the
/// one-channel-per-client and one-client-per-channel constraints directly.
struct RoundDecision {
  std::vector<std::uint8_t> participate;
  std::vector<int> channel;
  std::vector<double> freq_hz;
  std::vector<int> bits;
  /// Uploads are sent as raw 32-bit floats instead of quantized.
  bool full_precision = false;

  static RoundDecision empty(int clients);

  int clients() const noexcept { return static_cast<int>(participate.size()); }
  int participants() const noexcept;
  bool scheduled(int i) const { return participate[i] != 0; }

  /// Row i of the C x U allocation matrix as a length-C 0/1 vector.
  std::vector<std::uint8_t> allocation_row(int client, int channels) const;
};

}  // namespace qccf
