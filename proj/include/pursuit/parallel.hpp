#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pursuit {

/// Samples per work unit. Results never depend on it (every sample row owns
/// its RNG substream); it only sets scheduling granularity.
inline constexpr std::size_t kChunkSamples = 2048;

/// Worker count from PURSUIT_LAB_WORKERS (positive integer); 1 when unset.
/// Throws DomainError on a malformed value.
std::size_t configured_workers();

/// Resolves 0 to configured_workers().
std::size_t resolve_workers(std::size_t requested);

/// Calls fn(chunk, worker) for chunk = 0 .. chunks-1 on `workers` threads
/// (worker in [0, workers)). Chunks are handed out dynamically. The first
/// exception thrown by any call is rethrown after all threads join.
template <class Fn>
void run_chunks(std::size_t chunks, std::size_t workers, Fn&& fn) {
  if (chunks == 0) return;
  if (workers <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, std::size_t{0});
    return;
  }
  if (workers > chunks) workers = chunks;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](std::size_t worker) {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c, worker);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body, w);
  body(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pursuit
