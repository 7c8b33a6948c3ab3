#ifndef DYNTOK_PARALLEL_HPP
#define DYNTOK_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace dyntok {

/// Worker count for the data-parallel kernels. 0 means hardware concurrency.
/// Results never depend on this value: every task writes only its own slot.
struct Exec {
  unsigned threads = 1;

  unsigned resolved() const {
    if (threads != 0) return threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }

  /// Reads DYNTOK_THREADS (0 = auto). Unset or unparsable falls back to 0.
  static Exec from_env() {
    Exec exec{0};
    if (const char* env = std::getenv("DYNTOK_THREADS")) {
      char* end = nullptr;
      unsigned long v = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0') exec.threads = static_cast<unsigned>(v);
    }
    return exec;
  }
};

/// Runs fn(i) for i in [0, n), splitting the range into contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, const Exec& exec, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(exec.resolved(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dyntok

#endif  // DYNTOK_PARALLEL_HPP
