#pragma once

#include <cstddef>
#include <functional>

namespace chainverifier {

/// Worker cap: CHAINVERIFIER_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; the first exception thrown is rethrown after all
/// workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int workers = worker_count());

}  // namespace chainverifier
