#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bogovskii {

/// Worker count: BOGOVSKII_THREADS if set and positive, else hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("BOGOVSKII_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(i) for i in [0, count) on `threads` workers.
///
/// Workers pull fixed-size chunks from a shared counter. Each index is visited
/// exactly once and bodies only write to their own output slot, so results
/// never depend on the worker count. Any exception thrown by a body is
/// rethrown on the calling thread after all workers have joined.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  if (threads <= 0) threads = default_threads();
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = std::max<std::size_t>(1, count / (workers * 16));
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          std::size_t begin = next.fetch_add(chunk);
          if (begin >= count) break;
          std::size_t end = std::min(count, begin + chunk);
          for (std::size_t i = begin; i < end; ++i) body(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bogovskii
