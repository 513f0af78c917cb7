#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "inpaintopt/grid.hpp"

namespace inpaintopt {

// Seeded 64-bit Mersenne Twister. Bounded integers use rejection sampling
// so streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed.value) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n), n > 0.
  std::size_t below(std::size_t n);
  // Uniform real in [0, 1) with 53 random bits.
  double uniform();
  // Moves a uniform sample of k elements without replacement to the front
  // of `pool` (partial Fisher-Yates).
  template <typename T>
  void partial_shuffle(std::vector<T>& pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
      const std::size_t j = i + below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace inpaintopt
