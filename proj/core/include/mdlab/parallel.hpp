// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace mdlab {

/// Worker count used by parallel_for; 1 runs everything inline.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// callers write results into slot i, so output never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Seed for an independent RNG stream derived from (seed, task).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t task);

}  // namespace mdlab
