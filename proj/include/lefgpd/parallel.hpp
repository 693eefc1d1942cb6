#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace lefgpd {

// Worker cap from LEFGPD_THREADS, otherwise the hardware concurrency.
std::size_t worker_count();

// Runs task(i) for every i in [0, tasks). Tasks must write to disjoint
// outputs; scheduling order is unspecified.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& task);

// Reproducible parallel sum of `count` terms. The index range is cut into
// fixed chunks of `chunk` terms; `fill(begin, out)` writes the terms of one
// chunk into `out`. Chunk partials and the final fold both use pairwise
// summation in index order, so the result does not depend on the number of
// workers.
inline constexpr std::size_t kReductionChunk = 4096;

double deterministic_sum(std::size_t count,
                         const std::function<void(std::size_t begin, std::span<double> out)>& fill,
                         std::size_t chunk = kReductionChunk);

}  // namespace lefgpd
