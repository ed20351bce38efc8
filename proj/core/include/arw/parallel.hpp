#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace arw {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Seed for replica `replica` of cell `cell` under `root`. Pure function, so
/// results never depend on which worker ran the replica.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t cell,
                                    std::uint64_t replica) noexcept {
  std::uint64_t h = mix64(root + kGolden);
  h = mix64(h ^ (cell + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (replica + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Resolves a worker-count flag: 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(index, worker) for index in [begin, end) on `workers` threads with
/// static contiguous chunks. Callers write per-index results and reduce them
/// in index order afterwards, which keeps aggregates bit-identical for any
/// worker count. The first exception thrown by any call is rethrown.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, unsigned workers, Fn&& fn) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  workers = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1u, workers), count));
  if (workers == 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i, 0u);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = begin + count * w / workers;
    const std::size_t hi = begin + count * (w + 1) / workers;
    threads.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i, w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace arw
