#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace idde::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(t) for t in [0, count) on `count` threads (inline when count == 1).
template <class Fn>
void run_parallel(unsigned count, Fn&& fn) {
  if (count <= 1) {
    fn(0u);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(count - 1);
  for (unsigned t = 1; t < count; ++t) {
    workers.emplace_back([&fn, t] { fn(t); });
  }
  fn(0u);
}

// Sorts `data` by sorting `chunks` contiguous pieces concurrently and then
// merging neighbours level by level. The result is the unique ascending
// permutation, independent of the chunk count.
template <class T>
void parallel_sort(std::vector<T>& data, unsigned chunks) {
  const std::size_t size = data.size();
  chunks = static_cast<unsigned>(std::min<std::size_t>(chunks, std::max<std::size_t>(1, size / 4096)));
  if (chunks <= 1) {
    std::sort(data.begin(), data.end());
    return;
  }
  std::vector<std::size_t> bounds(chunks + 1);
  for (unsigned c = 0; c <= chunks; ++c) bounds[c] = size * c / chunks;

  run_parallel(chunks, [&](unsigned c) {
    std::sort(data.begin() + static_cast<std::ptrdiff_t>(bounds[c]),
              data.begin() + static_cast<std::ptrdiff_t>(bounds[c + 1]));
  });

  for (std::size_t width = 1; width < chunks; width *= 2) {
    std::vector<std::size_t> starts;
    for (std::size_t c = 0; c + width < chunks; c += 2 * width) starts.push_back(c);
    run_parallel(static_cast<unsigned>(starts.size()), [&](unsigned m) {
      const std::size_t lo = starts[m];
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min<std::size_t>(lo + 2 * width, chunks);
      std::inplace_merge(data.begin() + static_cast<std::ptrdiff_t>(bounds[lo]),
                         data.begin() + static_cast<std::ptrdiff_t>(bounds[mid]),
                         data.begin() + static_cast<std::ptrdiff_t>(bounds[hi]));
    });
  }
}

} // namespace idde::detail
