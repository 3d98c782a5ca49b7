#pragma once

#include <cstddef>
#include <functional>

namespace gluedgames {

/// Worker cap: the GLUEDGAMES_THREADS environment variable if set and
/// positive, otherwise (or when 0) the hardware concurrency.
std::size_t max_threads();

/// Number of chunks a work range of the given size is split into.
std::size_t parallel_chunk_count(std::size_t items);

/// Runs body(0) .. body(chunks - 1) on up to max_threads() workers. Callers
/// write results into per-chunk slots and reduce in chunk order, so the
/// outcome never depends on scheduling.
void parallel_for(std::size_t chunks,
                  const std::function<void(std::size_t)>& body);

}  // namespace gluedgames
