// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qccf {

enum class Errc {
  invalid_quantization_level,
  invalid_model,
  invalid_frequency,
  invalid_config,
  invalid_dataset,
  dimension_mismatch,
  no_channel,
  empty_round,
  nonconvex_regime,
  latency_infeasible,
  infeasible,
  premise_violation,
  instance_too_large,
  runtime_abort,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying one of the library error codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qccf
