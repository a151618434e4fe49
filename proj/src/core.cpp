#include "dicke/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dicke {

void ModelParams::validate() const {
  if (!(Omega > 0.0)) throw InvalidArgument("Omega must be positive");
  if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
  if (!(omega0 > 0.0)) throw InvalidArgument("omega0 must be positive");
  if (!(g >= 0.0)) throw InvalidArgument("g must be non-negative");
  if (!(dg >= 0.0)) throw InvalidArgument("dg must be non-negative");
}

Detunings detunings(const ModelParams& params, int k) {
  if (k < 0) throw InvalidArgument("resonance index k must be >= 0");
  const double shift = k * params.Omega / 2.0;
  return {k, params.omega - shift, params.omega0 - shift};
}

void GridSpec::validate() const {
  if (x_steps < 2 || y_steps < 2) throw InvalidArgument("grid needs at least 2 steps per axis");
  if (!(x_min < x_max)) throw InvalidArgument("grid requires x_min < x_max");
  if (!(y_min < y_max)) throw InvalidArgument("grid requires y_min < y_max");
}

double GridSpec::x_at(std::size_t i) const {
  const auto n = static_cast<double>(x_steps - 1);
  return (x_min * (n - static_cast<double>(i)) + x_max * static_cast<double>(i)) / n;
}

double GridSpec::y_at(std::size_t j) const {
  const auto n = static_cast<double>(y_steps - 1);
  return (y_min * (n - static_cast<double>(j)) + y_max * static_cast<double>(j)) / n;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("DICKE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t count = std::min(threads, n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dicke
