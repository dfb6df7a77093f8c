#include "absa/rng.hpp"

namespace absa {

Rng& global_rng() {
  static Rng rng(0);
  return rng;
}

void seed_global_rng(std::uint64_t seed) { global_rng().seed(seed); }

}  // namespace absa
