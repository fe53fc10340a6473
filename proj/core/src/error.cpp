// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/error.hpp"

namespace qccf {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_quantization_level:
      return "invalid-quantization-level";
    case Errc::invalid_model:
      return "invalid-model";
    case Errc::invalid_frequency:
      return "invalid-frequency";
    case Errc::invalid_config:
      return "invalid-config";
    case Errc::invalid_dataset:
      return "invalid-dataset";
    case Errc::dimension_mismatch:
      return "dimension-mismatch";
    case Errc::no_channel:
      return "no-channel";
    case Errc::empty_round:
      return "empty-round";
    case Errc::nonconvex_regime:
      return "nonconvex-regime";
    case Errc::latency_infeasible:
      return "latency-infeasible";
    case Errc::infeasible:
      return "infeasible";
    case Errc::premise_violation:
      return "premise-violation";
    case Errc::instance_too_large:
      return "instance-too-large";
    case Errc::runtime_abort:
      return "runtime-abort";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code) {}

}  // namespace qccf
