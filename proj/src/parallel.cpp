#include "nvc/parallel.hpp"

#include <stdexcept>

#include <oneapi/tbb/blocked_range.h>
#include <oneapi/tbb/parallel_for.h>


namespace nvc {

namespace {
constexpr std::size_t kMinParallelCost = 1 << 15;
}

void parallel_for(std::size_t count, std::size_t cost_per_item,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  if (count == 1 || count * cost_per_item < kMinParallelCost ||
      tbb::this_task_arena::max_concurrency() <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
                    });
}

WorkerPool::WorkerPool(int threads) : threads_(threads), arena_(threads > 0 ? threads : 1) {
  if (threads < 1) throw std::invalid_argument("worker count must be positive");
}

}  // namespace nvc
