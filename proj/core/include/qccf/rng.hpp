// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Named random substreams. Every stochastic component draws from a stream
// derived from (root seed, label), so two policies run with the same seed see
// identical channels, partitions and mini-batch orders.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qccf {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stable 64-bit hash of a label (FNV-1a followed by a splitmix finalizer).
std::uint64_t hash_label(std::string_view label) noexcept;

class Rng {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Stream for `label` under `root_seed`. Independent of creation order.
  static Rng derive(std::uint64_t root_seed, std::string_view label);

  /// Child stream of this stream's seed; does not consume state.
  Rng substream(std::string_view label) const { return derive(seed_, label); }

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

/// "client:3:round:17" style labels.
std::string stream_label(std::string_view kind, long long a);
std::string stream_label(std::string_view kind, long long a,
                         std::string_view kind2, long long b);

}  // namespace qccf
