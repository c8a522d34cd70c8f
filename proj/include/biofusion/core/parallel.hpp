// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace biofusion {

/// True when BIOFUSION_DETERMINISTIC=1 is set in the environment.
inline bool deterministic_mode() {
  const char* env = std::getenv("BIOFUSION_DETERMINISTIC");
  return env != nullptr && std::strcmp(env, "1") == 0;
}

/// Calls fn(i) for i in [0, n) across worker threads. Each index is visited
/// exactly once; callers write results into slot i so output order equals
/// input order regardless of scheduling. The first exception thrown by any
/// call is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::size_t workers = deterministic_mode() ? 1 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace biofusion
