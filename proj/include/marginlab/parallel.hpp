#pragma once

#include "marginlab/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace marginlab {

/// Worker count: the explicit request, else MARGINLAB_JOBS, else the hardware
/// concurrency (at least 1).
inline unsigned resolve_jobs(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MARGINLAB_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h > 0 ? h : 1;
}

/// Evaluates pred(0), pred(1), ... on a pool and returns the lowest index for
/// which pred is true (n if none). Every index below the returned one is
/// evaluated; indices above it may or may not be. An exception escapes from
/// the lowest index that threw, after all workers have stopped.
template <class Pred>
std::size_t parallel_first(std::size_t n, unsigned jobs, Pred&& pred) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> limit{n};
  std::mutex err_mu;
  std::exception_ptr err;
  std::size_t err_index = n;

  auto lower_limit = [&](std::size_t i) {
    std::size_t cur = limit.load();
    while (i < cur && !limit.compare_exchange_weak(cur, i)) {
    }
  };
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= limit.load()) return;
      try {
        if (pred(i)) lower_limit(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
        lower_limit(i);
      }
    }
  };

  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(n, 1)));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const std::size_t found = limit.load();
  if (err && err_index <= found) std::rethrow_exception(err);
  return found;
}

/// Runs body(i) for every i in [0, n) on a pool.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  parallel_first(n, jobs, [&](std::size_t i) {
    body(i);
    return false;
  });
}

}  // namespace marginlab
