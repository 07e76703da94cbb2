#include "mcl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mcl {

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (workers <= 1 || n < 2) {
    fn(0, n, 0);
    return;
  }
  const auto w = static_cast<std::size_t>(workers);
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t begin = n * k / w;
    const std::size_t end = n * (k + 1) / w;
    threads.emplace_back([&, begin, end, k] {
      try {
        fn(begin, end, static_cast<int>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

void parallel_tasks(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  if (workers <= 1 || count < 2) {
    for (std::size_t k = 0; k < count; ++k) {
      task(k);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          task(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

int default_worker_count(int fallback) {
  if (const char* env = std::getenv("MCL_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) {
        return v;
      }
    } catch (...) {
    }
  }
  return fallback;
}

}  // namespace mcl
