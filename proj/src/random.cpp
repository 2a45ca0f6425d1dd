#include "krcd/random.hpp"

#include <numeric>
#include <utility>

#include "krcd/error.hpp"

namespace krcd {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    std::uint64_t seed) {
  if (count > n) throw ArgumentError("cannot draw more indices than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  const CounterRng rng(seed, 0x5eed5e1ec7ULL);
  for (std::size_t i = 0; i < count; ++i) {
    // Multiply-shift maps 64 random bits onto [0, n - i) with negligible bias.
    const auto span = static_cast<unsigned __int128>(n - i);
    const auto offset = static_cast<std::size_t>((span * rng.bits(i)) >> 64);
    std::swap(pool[i], pool[i + offset]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace krcd
