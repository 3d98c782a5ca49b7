#include "gluedgames/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gluedgames {

std::size_t max_threads() {
  if (const char* env = std::getenv("GLUEDGAMES_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::size_t parallel_chunk_count(std::size_t items) {
  return std::max<std::size_t>(1, std::min<std::size_t>(items, 4 * max_threads()));
}

void parallel_for(std::size_t chunks,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(max_threads(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks;
           c = next.fetch_add(1))
        body(c);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace gluedgames
