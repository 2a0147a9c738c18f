#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace cgo {

// Worker count from CGO_THREADS, else the hardware concurrency.
inline int thread_count() {
  if (const char* s = std::getenv("CGO_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : int(h);
}

// Static block partition; each index is processed by exactly one worker so results
// do not depend on the thread count.
template <class F>
void parallel_for(long n, F&& f) {
  int nt = thread_count();
  if (nt <= 1 || n < 64) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  nt = int(std::min<long>(nt, n));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    long lo = n * t / nt, hi = n * (t + 1) / nt;
    pool.emplace_back([lo, hi, &f] {
      for (long i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cgo
