#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace mapd {

// Repo-wide PRNG: 64-bit Mersenne Twister (std::mt19937_64, fully specified by
// the standard) with bounded draws by rejection, so sequences are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  int index(std::size_t size) { return static_cast<int>(below(size)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mapd
