#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gbst {

// Items are grouped into fixed-size chunks independent of the thread count,
// so per-chunk partial results reduced in chunk order are identical for any
// number of threads.
inline constexpr std::size_t kReductionChunk = 1024;

inline std::size_t chunk_count(std::size_t items, std::size_t chunk = kReductionChunk) {
  return (items + chunk - 1) / chunk;
}

/// Calls fn(chunk_index, begin, end) once per chunk, using up to `threads`
/// workers. The first exception thrown by any chunk is rethrown.
template <typename Fn>
void for_each_chunk(std::size_t items, int threads, Fn&& fn,
                    std::size_t chunk = kReductionChunk) {
  const std::size_t chunks = chunk_count(items, chunk);
  auto run = [&](std::size_t c) { fn(c, c * chunk, std::min(items, (c + 1) * chunk)); };
  const std::size_t workers =
      std::min<std::size_t>(chunks, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gbst
