#pragma once

#include <cstddef>
#include <functional>

#include <oneapi/tbb/task_arena.h>

namespace nvc {

// Runs body(i) for every i in [0, count) on the workers of the enclosing
// WorkerPool (or inline when there is none). Every index is handled by exactly
// one worker, so kernels that write disjoint outputs per index produce results
// that do not depend on the thread count. `cost_per_item` is a rough operation
// count used to skip threading for tiny workloads.
void parallel_for(std::size_t count, std::size_t cost_per_item,
                  const std::function<void(std::size_t)>& body);

// Scoped worker count. Work submitted through run() sees exactly `threads`
// workers; nothing global is modified.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);

  int threads() const { return threads_; }

  template <typename F>
  decltype(auto) run(F&& f) {
    return arena_.execute(std::forward<F>(f));
  }

 private:
  int threads_;
  tbb::task_arena arena_;
};

}  // namespace nvc
