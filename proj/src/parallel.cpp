#include "krcd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace krcd {

namespace {

std::atomic<int> g_override{0};

int env_cap() {
  const char* raw = std::getenv("KRCD_THREADS");
  if (raw == nullptr) return 0;
  try {
    return std::max(0, std::stoi(raw));
  } catch (...) {
    return 0;
  }
}

}  // namespace

int thread_count() {
  if (int forced = g_override.load(); forced > 0) return forced;
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (int cap = env_cap(); cap > 0) hw = std::min(hw, cap);
  return hw;
}

void set_thread_count(int threads) { g_override.store(std::max(0, threads)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int threads) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(threads > 0 ? threads : thread_count());
  workers = std::min(workers, n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace krcd
