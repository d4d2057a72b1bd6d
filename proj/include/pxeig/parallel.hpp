#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <type_traits>
#include <vector>

namespace pxeig {

/// Evaluates f(0..n-1) on worker threads and returns the results in index order.
/// Results do not depend on the worker count.
template <typename F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<R> out;
  out.reserve(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  for (std::size_t base = 0; base < n; base += workers) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = base; i < std::min(n, base + workers); ++i) {
      batch.push_back(std::async(std::launch::async, [&f, i] { return f(i); }));
    }
    for (auto& fut : batch) out.push_back(fut.get());
  }
  return out;
}

}  // namespace pxeig
