// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/quantizer.hpp"

#include <cmath>
#include <string>

#include "qccf/error.hpp"

namespace qccf {
namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > kMaxQuantizationBits) {
    throw Error(Errc::invalid_quantization_level,
                "q must be in [1, 32], got " + std::to_string(bits));
  }
}

std::uint64_t levels_for(int bits) {
  return (std::uint64_t{1} << bits) - 1;
}

}  // namespace

QuantizedModel::QuantizedModel(double range, int bits, std::size_t dim)
    : range_(range),
      bits_(bits),
      width_((bits + 7) / 8),
      signs_(dim, 0),
      packed_(dim * static_cast<std::size_t>((bits + 7) / 8), 0) {
  check_bits(bits);
}

std::uint64_t QuantizedModel::levels() const noexcept {
  return levels_for(bits_);
}

std::uint32_t QuantizedModel::knob_index(std::size_t z) const {
  std::uint32_t u = 0;
  const std::uint8_t* p = packed_.data() + z * width_;
  for (int b = 0; b < width_; ++b) u |= std::uint32_t{p[b]} << (8 * b);
  return u;
}

void QuantizedModel::set(std::size_t z, int sign, std::uint32_t knob) {
  signs_[z] = sign < 0 ? 1 : 0;
  std::uint8_t* p = packed_.data() + z * width_;
  for (int b = 0; b < width_; ++b) p[b] = (knob >> (8 * b)) & 0xffu;
}

QuantizedModel quantize(std::span<const double> model, int bits, Rng& rng) {
  check_bits(bits);
  if (model.empty()) throw Error(Errc::invalid_model, "empty model");

  double range = 0.0;
  for (double x : model) {
    if (!std::isfinite(x)) throw Error(Errc::invalid_model, "non-finite entry");
    range = std::max(range, std::abs(x));
  }

  QuantizedModel qm(range, bits, model.size());
  if (range == 0.0) return qm;  // all knobs 0: exact zero vector

  const auto levels = levels_for(bits);
  const double scale = static_cast<double>(levels);
  for (std::size_t z = 0; z < model.size(); ++z) {
    const double a = std::abs(model[z]);
    // |x| / range is exactly 1 at the maximum, so the top knob is hit exactly.
    const double pos = a / range * scale;
    auto u = static_cast<std::uint64_t>(std::floor(pos));
    if (u >= levels) {
      u = levels;
    } else {
      const double frac = pos - static_cast<double>(u);
      // frac == 0 (value on a knob) never rounds up.
      if (rng.uniform() < frac) ++u;
    }
    qm.set(z, model[z] < 0.0 ? -1 : 1, static_cast<std::uint32_t>(u));
  }
  return qm;
}

double knob_value(std::uint32_t knob, double range, int bits) {
  const auto levels = levels_for(bits);
  if (knob == levels) return range;
  return static_cast<double>(knob) * range / static_cast<double>(levels);
}

std::vector<double> dequantize(const QuantizedModel& qm) {
  std::vector<double> out(qm.size());
  for (std::size_t z = 0; z < qm.size(); ++z) {
    out[z] = qm.sign(z) * knob_value(qm.knob_index(z), qm.range(), qm.bits());
  }
  return out;
}

std::uint64_t payload_bits(std::uint64_t dim, int bits) {
  return dim * static_cast<std::uint64_t>(bits) + dim + 32;
}

std::uint64_t full_precision_payload_bits(std::uint64_t dim) {
  return dim * 32 + 32;
}

double variance_bound(std::uint64_t dim, double theta_max, int bits) {
  const double levels = static_cast<double>(levels_for(bits));
  return static_cast<double>(dim) * theta_max * theta_max /
         (4.0 * levels * levels);
}

}  // namespace qccf
