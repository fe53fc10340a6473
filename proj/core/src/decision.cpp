// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/decision.hpp"

#include <algorithm>

namespace qccf {

RoundDecision RoundDecision::empty(int clients) {
  RoundDecision d;
  d.participate.assign(clients, 0);
  d.channel.assign(clients, -1);
  d.freq_hz.assign(clients, 0.0);
  d.bits.assign(clients, 1);
  return d;
}

int RoundDecision::participants() const noexcept {
  return static_cast<int>(std::count(participate.begin(), participate.end(), 1));
}

std::vector<std::uint8_t> RoundDecision::allocation_row(int client,
                                                        int channels) const {
  std::vector<std::uint8_t> row(channels, 0);
  const int c = channel[client];
  if (participate[client] && c >= 0 && c < channels) row[c] = 1;
  return row;
}

}  // namespace qccf
