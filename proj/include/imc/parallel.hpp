#pragma once

// Deterministic fork-join over fixed chunks. Chunk results land in a vector
// indexed by chunk id and are reduced sequentially in that order, so the
// outcome is bit-identical for any worker count.

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace imc {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk) for chunk in [0, num_chunks) on `workers` threads and
// returns the per-chunk results in chunk order.
template <typename Result>
std::vector<Result> chunked_map(std::size_t num_chunks, int workers,
                                const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(num_chunks);
  if (num_chunks == 0) return results;
  workers = resolve_workers(workers);
  if (workers == 1 || num_chunks == 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) results[c] = fn(c);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) return;
      results[c] = fn(c);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), num_chunks));
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace imc
