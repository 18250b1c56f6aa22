#pragma once

#include <cstddef>
#include <functional>

namespace focusfl {

/// Worker count for parallel sections: the FOCUS_FL_THREADS env var if set,
/// else hardware concurrency. A ScopedThreadLimit takes precedence over both.
std::size_t thread_count();

class ScopedThreadLimit {
 public:
  explicit ScopedThreadLimit(std::size_t threads);
  ~ScopedThreadLimit();
  ScopedThreadLimit(const ScopedThreadLimit&) = delete;
  ScopedThreadLimit& operator=(const ScopedThreadLimit&) = delete;

 private:
  std::size_t previous_;
};

/// Runs body(i) for i in [0, n). Callers write into pre-sized slots indexed by
/// i; all reductions happen afterwards in index order. The first exception
/// thrown by any task is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace focusfl
