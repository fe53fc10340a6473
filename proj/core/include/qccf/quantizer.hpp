// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Unbiased stochastic quantizer for model uploads. Each dimension is mapped
// onto one of 2^q evenly spaced knobs over [0, range] (range = max |value|)
// plus a sign bit; the knob is chosen between the two neighbours of |value|
// with probabilities proportional to proximity.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qccf/rng.hpp"

namespace qccf {

inline constexpr int kMaxQuantizationBits = 32;

class QuantizedModel {
 public:
  QuantizedModel(double range, int bits, std::size_t dim);

  double range() const noexcept { return range_; }
  int bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return signs_.size(); }

  /// Number of intervals, 2^q - 1.
  std::uint64_t levels() const noexcept;

  int sign(std::size_t z) const { return signs_[z] ? -1 : 1; }
  std::uint32_t knob_index(std::size_t z) const;

  void set(std::size_t z, int sign, std::uint32_t knob);

  /// Bytes used per knob index in memory (ceil(q / 8)).
  int index_width_bytes() const noexcept { return width_; }

 private:
  double range_;
  int bits_;
  int width_;
  std::vector<std::uint8_t> signs_;  // 1 = negative
  std::vector<std::uint8_t> packed_;
};

/// Throws Error(invalid_quantization_level) unless 1 <= bits <= 32 and
/// Error(invalid_model) on empty or non-finite input.
QuantizedModel quantize(std::span<const double> model, int bits, Rng& rng);

std::vector<double> dequantize(const QuantizedModel& qm);

/// Dequantized value of one dimension: sign * u * range / (2^q - 1).
double knob_value(std::uint32_t knob, double range, int bits);

/// Uplink payload in bits: Z*q sign/knob bits plus Z sign bits plus a
/// 32-bit range field.
std::uint64_t payload_bits(std::uint64_t dim, int bits);

/// Payload when the model is sent unquantized as 32-bit floats.
std::uint64_t full_precision_payload_bits(std::uint64_t dim);

/// Upper bound on E||Q(x) - x||^2: Z * range^2 / (4 (2^q - 1)^2).
double variance_bound(std::uint64_t dim, double theta_max, int bits);

}  // namespace qccf
