#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fbmlab {

/// Monte Carlo estimate: sample mean, standard error of the mean, count.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Compensated accumulator; used for the final sequential reductions so that
/// results do not depend on how replications were scheduled.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline McEstimate summarize(std::span<const double> xs) {
  McEstimate e;
  e.n = xs.size();
  if (e.n == 0) return e;
  KahanSum sum;
  for (double x : xs) sum.add(x);
  e.value = sum.value() / static_cast<double>(e.n);
  if (e.n >= 2) {
    KahanSum sq;
    for (double x : xs) {
      const double d = x - e.value;
      sq.add(d * d);
    }
    const double var = sq.value() / static_cast<double>(e.n - 1);
    e.std_error = std::sqrt(var / static_cast<double>(e.n));
  }
  return e;
}

/// Mean and standard error of the pairwise difference a[i] - b[i].
inline McEstimate summarize_paired_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("summarize_paired_diff: size mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return summarize(d);
}

/// Runs body(i) for i in [0, n) on `workers` threads with a static block
/// partition. Each index is visited exactly once; bodies must only write to
/// index-owned state, which keeps results identical for any worker count.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::thread::hardware_concurrency();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers;
      const std::size_t hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fbmlab
