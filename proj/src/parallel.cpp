#include "lipgp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace lipgp {

namespace {
std::atomic<int> g_threads{0};
thread_local bool t_inside_worker = false;  // nested loops run serially
}

int num_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void set_num_threads(int n) { g_threads.store(std::max(0, n)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t, int)>& fn, int max_workers) {
  if (count == 0) return;
  const int limit = max_workers > 0 ? std::min(max_workers, num_threads()) : num_threads();
  const auto workers = std::min(static_cast<std::size_t>(limit), count);
  if (workers <= 1 || t_inside_worker) {
    fn(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, w, b, e] {
      t_inside_worker = true;
      try {
        fn(b, e, static_cast<int>(w));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lipgp
