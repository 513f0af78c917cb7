#include "inpaintopt/random.hpp"

#include <limits>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ValidationError("rng: empty range");
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace inpaintopt
