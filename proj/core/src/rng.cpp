// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/rng.hpp"

#include <cmath>

namespace qccf {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

Rng Rng::derive(std::uint64_t root_seed, std::string_view label) {
  return Rng(splitmix64(splitmix64(root_seed) ^ hash_label(label)));
}

// The distributions below are written out rather than taken from <random> so
// that streams are reproducible across standard library implementations.
double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
  // Box-Muller; one draw per call keeps the stream position predictable.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = engine_type::max() - engine_type::max() % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<int>(x % span);
}

std::string stream_label(std::string_view kind, long long a) {
  std::string s(kind);
  s += ':';
  s += std::to_string(a);
  return s;
}

std::string stream_label(std::string_view kind, long long a,
                         std::string_view kind2, long long b) {
  std::string s = stream_label(kind, a);
  s += ':';
  s += kind2;
  s += ':';
  s += std::to_string(b);
  return s;
}

}  // namespace qccf
