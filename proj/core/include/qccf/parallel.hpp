// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace qccf {

/// Worker count from QCCF_WORKERS (default 1, clamped to >= 1).
int default_worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write into
/// index-addressed slots only, so results do not depend on the worker count.
/// The first exception thrown by any task is rethrown on the calling thread.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace qccf
