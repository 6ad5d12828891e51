#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tedbeta {

// Runs fn(i) for i in [begin, end) on up to `jobs` threads.  Callers must make
// fn(i) write only to slot i of a preallocated result container; with that
// discipline the output is identical for any job count.  The first exception
// thrown by a worker is rethrown on the calling thread.
template <class F>
void parallel_for(int begin, int end, int jobs, F&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  if (jobs > count) jobs = count;

  std::atomic<int> next{begin};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (err) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace tedbeta
