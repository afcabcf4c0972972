#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sdac {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Indices are
// claimed in increasing order. Once `stop` is set no further index is claimed;
// in-flight calls finish. The exception from the lowest failing index is
// rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn, std::atomic<bool>* stop = nullptr) {
  if (count == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      if (stop && stop->load()) return;
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (;;) {
      if ((stop && stop->load()) || failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

// splitmix64 finalizer; derives independent seeds from structured keys.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

template <class... Parts>
std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) {
  std::uint64_t h = mix_seed(seed);
  ((h = mix_seed(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

}  // namespace sdac
